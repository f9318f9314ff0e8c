"""Per-language script profiles and character classification.

A profile names three character sets for a language: the native Unicode
block ``B``, the special non-letters ``N`` (punctuation, Basic Latin
non-letters, native digits) and the lexicon-covered subset ``B_hat`` of
``B``.  It also carries deterministic romanizations for characters such as
the Danda or native digits.

Profiles are plain text files, one record per line::

    language hi
    script Devanagari
    range 0900..097F B
    range 2000..206F N
    char 0964 N
    map 0964 .

Anything after ``#`` is a comment.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

__all__ = [
    "CharClass",
    "ProfileError",
    "ScriptProfile",
    "available_languages",
    "bhat_segments",
    "classify",
    "deterministic_latinize",
    "is_basic_latin_letter",
    "load_profile",
    "normalize",
    "parse_profile",
]


class ProfileError(ValueError):
    """Raised for malformed profile files or inconsistent profiles."""


class CharClass(NamedTuple):
    in_B: bool
    in_N: bool
    in_Bhat: bool
    is_basic_latin_letter: bool


def is_basic_latin_letter(c: str) -> bool:
    return ("a" <= c <= "z") or ("A" <= c <= "Z")


@dataclass(frozen=True)
class ScriptProfile:
    """Character inventory of one language's native script.

    ``native_block`` is a tuple of inclusive ``(lo, hi)`` code point ranges.
    ``lexicon_block`` starts empty and is filled from a romanization lexicon
    with :meth:`with_lexicon`.
    """

    language_tag: str
    script_name: str
    native_block: tuple[tuple[int, int], ...]
    special_nonletters: frozenset[int]
    lexicon_block: frozenset[int] = frozenset()
    latin_map: dict[int, str] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if any(not self.in_B(c) for c in self.lexicon_block):
            raise ProfileError("lexicon_block must be a subset of native_block")
        for cp, val in self.latin_map.items():
            if not val or any(not (0x20 <= ord(ch) <= 0x7E) for ch in val):
                raise ProfileError(f"latin_map value for U+{cp:04X} is not printable ASCII: {val!r}")

    def in_B(self, c: int | str) -> bool:
        cp = ord(c) if isinstance(c, str) else c
        return any(lo <= cp <= hi for lo, hi in self.native_block)

    def in_N(self, c: int | str) -> bool:
        cp = ord(c) if isinstance(c, str) else c
        return cp in self.special_nonletters

    def in_Bhat(self, c: int | str) -> bool:
        cp = ord(c) if isinstance(c, str) else c
        return cp in self.lexicon_block

    def with_lexicon(self, native_words: Iterable[str]) -> "ScriptProfile":
        """Return a copy whose ``B_hat`` is the set of native-block code points
        used by ``native_words``.

        Code points outside ``B`` (e.g. zero-width joiners) are dropped so the
        subset invariant holds.
        """
        covered = {ord(ch) for w in native_words for ch in normalize(w)}
        return replace(self, lexicon_block=frozenset(c for c in covered if self.in_B(c)))

    def lexicon_chars(self) -> str:
        return "".join(sorted(chr(c) for c in self.lexicon_block))


def classify(c: str | int, p: ScriptProfile) -> CharClass:
    ch = chr(c) if isinstance(c, int) else c
    return CharClass(p.in_B(ch), p.in_N(ch), p.in_Bhat(ch), is_basic_latin_letter(ch))


def normalize(text: str | bytes) -> str:
    """NFC-normalize ``text``; bytes are decoded as strict UTF-8."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return unicodedata.normalize("NFC", text)


def deterministic_latinize(text: str, p: ScriptProfile) -> str:
    if not p.latin_map:
        return text
    return "".join(p.latin_map.get(ord(ch), ch) for ch in text)


def bhat_segments(text: str, p: ScriptProfile) -> list[tuple[str, bool]]:
    """Split ``text`` into maximal runs of ``B_hat`` characters and the rest.

    Returns ``(piece, is_word)`` pairs whose concatenation is ``text``.
    Whitespace never belongs to a word, so words never span tokens.
    """
    out: list[tuple[str, bool]] = []
    start = 0
    for i in range(1, len(text) + 1):
        if i == len(text) or p.in_Bhat(text[i]) != p.in_Bhat(text[start]):
            out.append((text[start:i], p.in_Bhat(text[start])))
            start = i
    return out


def _parse_hex(tok: str, lineno: int) -> int:
    try:
        cp = int(tok, 16)
    except ValueError:
        raise ProfileError(f"line {lineno}: bad code point {tok!r}") from None
    if not 0 <= cp <= 0x10FFFF:
        raise ProfileError(f"line {lineno}: code point out of range {tok!r}")
    return cp


def parse_profile(text: str, source: str = "<string>") -> ScriptProfile:
    language = script = None
    ranges: list[tuple[int, int]] = []
    special: set[int] = set()
    latin_map: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        # a map value may itself be '#', so comments only start after it
        first_free = 3 if toks[:1] == ["map"] else 0
        for i in range(first_free, len(toks)):
            if toks[i].startswith("#"):
                toks = toks[:i]
                break
        if not toks:
            continue
        kind = toks[0]
        if kind == "language" and len(toks) == 2:
            language = toks[1]
        elif kind == "script" and len(toks) == 2:
            script = toks[1]
        elif kind == "range" and len(toks) == 3 and ".." in toks[1]:
            lo_s, hi_s = toks[1].split("..", 1)
            lo, hi = _parse_hex(lo_s, lineno), _parse_hex(hi_s, lineno)
            if lo > hi:
                raise ProfileError(f"{source}:{lineno}: empty range {toks[1]}")
            if toks[2] == "B":
                ranges.append((lo, hi))
            elif toks[2] == "N":
                special.update(range(lo, hi + 1))
            else:
                raise ProfileError(f"{source}:{lineno}: unknown set {toks[2]!r}")
        elif kind == "char" and len(toks) == 3 and toks[2] == "N":
            special.add(_parse_hex(toks[1], lineno))
        elif kind == "map" and len(toks) >= 3:
            latin_map[_parse_hex(toks[1], lineno)] = toks[2]
        else:
            raise ProfileError(f"{source}:{lineno}: cannot parse {raw.strip()!r}")
    if language is None or not ranges:
        raise ProfileError(f"{source}: profile needs a 'language' line and at least one B range")
    return ScriptProfile(
        language_tag=language,
        script_name=script or "",
        native_block=tuple(sorted(ranges)),
        special_nonletters=frozenset(special),
        latin_map=latin_map,
    )


def available_languages() -> list[str]:
    pkg = resources.files("translitkit") / "profiles"
    return sorted(p.name[:-4] for p in pkg.iterdir() if p.name.endswith(".txt"))


def load_profile(tag_or_path: str | Path, lexicon_words: Iterable[str] | None = None) -> ScriptProfile:
    """Load a bundled profile by language tag, or a profile file by path."""
    path = Path(tag_or_path)
    if path.suffix == ".txt" or path.exists():
        text = path.read_text(encoding="utf-8")
        source = str(path)
    else:
        res = resources.files("translitkit") / "profiles" / f"{tag_or_path}.txt"
        if not res.is_file():
            raise ProfileError(
                f"no bundled profile for {tag_or_path!r}; available: {', '.join(available_languages())}"
            )
        text = res.read_text(encoding="utf-8")
        source = str(tag_or_path)
    profile = parse_profile(text, source)
    if lexicon_words is not None:
        profile = profile.with_lexicon(lexicon_words)
    return profile
