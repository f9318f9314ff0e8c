"""Native-script corpus preparation.

The pipeline runs in two passes over pre-extracted page records:

1. drop excluded pages, then aggregate script statistics per section title
   over all remaining pages and drop titles with too much foreign text;
2. segment the surviving sections into sentences, NFC-normalize them and
   keep sentences that pass the three script criteria.

Also here: lexicon word sampling, a lemma-disjoint train/dev/test split and
the recursive halving used to shorten long sentences for annotation.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .align import LexiconEntry
from .scriptdata import ScriptProfile, normalize

__all__ = [
    "PAGE_FLAGS",
    "CorpusResult",
    "FilterDecision",
    "FilterThresholds",
    "PageRecord",
    "ScriptStats",
    "SplitError",
    "filter_corpus",
    "page_filter",
    "read_pages",
    "sample_lexicon_words",
    "script_stats",
    "section_title_filter",
    "segment_sentences",
    "sentence_filter",
    "split_lexicon",
    "split_long_sentence",
    "split_sizes",
    "stem_heuristic",
]

# flag name -> omission reason, in the order they are checked
PAGE_FLAGS = {
    "is_redirect": "redirect",
    "has_settlement_infobox": "settlement_infobox",
    "has_collapsible_template": "collapsible_template",
    "refs_censusindia_or_enwiki": "censusindia_or_enwiki",
    "has_wikitable_or_long_list": "wikitable_or_list",
}

SENTENCE_TERMINATORS = "।۔.?!"


@dataclass(frozen=True)
class FilterThresholds:
    section_outside_max: float = 0.20
    sent_outside_max: float = 0.10
    sent_native_min: float = 0.85
    sent_word_native_min: float = 0.85
    word_min_freq: int = 2
    split_token_max: int = 30

    def __post_init__(self):
        for name in ("section_outside_max", "sent_outside_max", "sent_native_min", "sent_word_native_min"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


class FilterDecision(NamedTuple):
    keep: bool
    reason: str | None = None


KEEP = FilterDecision(True)


@dataclass
class PageRecord:
    page_id: str
    title: str
    flags: frozenset[str] = frozenset()
    sections: list[tuple[str, str]] = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: Mapping) -> "PageRecord":
        flags = obj.get("flags", ())
        if isinstance(flags, Mapping):
            flags = [k for k, v in flags.items() if v]
        unknown = set(flags) - set(PAGE_FLAGS)
        if unknown:
            raise ValueError(f"page {obj.get('page_id')!r}: unknown flags {sorted(unknown)}")
        sections = [(str(t), str(x)) for t, x in obj.get("sections", [])]
        return cls(str(obj["page_id"]), str(obj.get("title", "")), frozenset(flags), sections)


def read_pages(path: str | Path) -> Iterator[PageRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield PageRecord.from_json(json.loads(line))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc


def page_filter(page: PageRecord) -> FilterDecision:
    for flag, reason in PAGE_FLAGS.items():
        if flag in page.flags:
            return FilterDecision(False, reason)
    return KEEP


class ScriptStats(NamedTuple):
    frac_outside: float
    frac_native: float
    frac_words_native: float


@dataclass
class _Tally:
    """Raw counts behind :class:`ScriptStats`; adding tallies is associative."""

    chars: int = 0
    outside: int = 0
    native: int = 0
    words: int = 0
    native_words: int = 0

    def __iadd__(self, other: "_Tally") -> "_Tally":
        self.chars += other.chars
        self.outside += other.outside
        self.native += other.native
        self.words += other.words
        self.native_words += other.native_words
        return self

    def stats(self) -> ScriptStats:
        if not self.chars:
            return ScriptStats(0.0, 0.0, 0.0)
        return ScriptStats(
            self.outside / self.chars,
            self.native / self.chars,
            self.native_words / self.words if self.words else 0.0,
        )


def _tally(text: str, p: ScriptProfile) -> _Tally:
    t = _Tally()
    for word in text.split():
        t.words += 1
        has_letter = False
        for ch in word:
            t.chars += 1
            in_b = p.in_B(ch)
            in_n = p.in_N(ch)
            if in_b:
                t.native += 1
                if not in_n:
                    has_letter = True
            elif not in_n:
                t.outside += 1
        t.native_words += has_letter
    return t


def script_stats(text: str, p: ScriptProfile) -> ScriptStats:
    """Fractions of foreign characters, native characters and native words.

    Whitespace is excluded from the character denominators.
    """
    return _tally(text, p).stats()


def section_title_filter(
    sections: Iterable[tuple[str, str]], p: ScriptProfile, t: FilterThresholds = FilterThresholds()
) -> set[str]:
    """Titles whose pooled text has more than ``section_outside_max``
    characters outside both ``B`` and ``N``."""
    tallies: dict[str, _Tally] = defaultdict(_Tally)
    for title, text in sections:
        tallies[title] += _tally(normalize(text), p)
    return {title for title, tal in tallies.items() if tal.stats().frac_outside > t.section_outside_max}


_SENT_SPLIT = re.compile(f"(?<=[{re.escape(SENTENCE_TERMINATORS)}])\\s+")


def segment_sentences(text: str, p: ScriptProfile | None = None) -> list[str]:
    """Split on newlines, then after a terminator followed by whitespace."""
    out = []
    for line in text.splitlines():
        for piece in _SENT_SPLIT.split(line):
            piece = piece.strip()
            if piece:
                out.append(piece)
    return out


def sentence_filter(sentence: str, p: ScriptProfile, t: FilterThresholds = FilterThresholds()) -> FilterDecision:
    s = script_stats(sentence, p)
    if s.frac_outside > t.sent_outside_max:
        return FilterDecision(False, "outside_fraction")
    if s.frac_native < t.sent_native_min:
        return FilterDecision(False, "native_fraction")
    if s.frac_words_native < t.sent_word_native_min:
        return FilterDecision(False, "native_word_fraction")
    return KEEP


# --- pipeline ----------------------------------------------------------------


@dataclass
class KeptSentence:
    page_id: str
    section_index: int
    section_title: str
    sentence_index: int
    text: str


@dataclass
class CorpusResult:
    sentences: list[KeptSentence]
    omitted_pages: dict[str, str]
    omitted_titles: set[str]
    omitted_sentences: list[tuple[str, str, int, str]]
    section_stats_scope: str = "kept_pages"

    def summary(self) -> dict:
        return {
            "kept_sentences": len(self.sentences),
            "omitted_pages": dict(sorted(self.omitted_pages.items())),
            "omitted_section_titles": sorted(self.omitted_titles),
            "omitted_sentences": len(self.omitted_sentences),
            "omitted_by_criterion": dict(Counter(r for *_, r in self.omitted_sentences)),
            "section_stats_scope": self.section_stats_scope,
        }


def _page_tallies(args) -> dict[str, _Tally]:
    page, p = args
    out: dict[str, _Tally] = defaultdict(_Tally)
    for title, text in page.sections:
        out[title] += _tally(normalize(text), p)
    return dict(out)


def _page_sentences(args):
    page, p, t, omitted_titles = args
    kept, dropped = [], []
    for si, (title, text) in enumerate(page.sections):
        if title in omitted_titles:
            continue
        for k, sent in enumerate(segment_sentences(normalize(text), p)):
            sent = normalize(sent)
            dec = sentence_filter(sent, p, t)
            if dec.keep:
                kept.append(KeptSentence(page.page_id, si, title, k, sent))
            else:
                dropped.append((page.page_id, title, k, dec.reason))
    return kept, dropped


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return list(map(fn, items))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=64))


def filter_corpus(
    pages: Iterable[PageRecord],
    p: ScriptProfile,
    t: FilterThresholds = FilterThresholds(),
    jobs: int = 1,
) -> CorpusResult:
    """Run page, section-title and sentence filtering.

    Pages are processed in ``page_id`` order, so the output does not depend
    on input order or worker count.  Section statistics are pooled over the
    pages that survive page filtering.
    """
    kept_pages, omitted_pages = [], {}
    for page in sorted(pages, key=lambda pg: pg.page_id):
        dec = page_filter(page)
        if dec.keep:
            kept_pages.append(page)
        else:
            omitted_pages[page.page_id] = dec.reason
    pooled: dict[str, _Tally] = defaultdict(_Tally)
    for part in _map(_page_tallies, [(pg, p) for pg in kept_pages], jobs):
        for title, tal in part.items():
            pooled[title] += tal
    omitted_titles = {
        title for title, tal in pooled.items() if tal.stats().frac_outside > t.section_outside_max
    }
    sentences, dropped = [], []
    for kept, drop in _map(_page_sentences, [(pg, p, t, omitted_titles) for pg in kept_pages], jobs):
        sentences.extend(kept)
        dropped.extend(drop)
    return CorpusResult(sentences, omitted_pages, omitted_titles, dropped)


# --- lexicon sampling and splitting ------------------------------------------


def _lexicon_eligible(word: str, p: ScriptProfile) -> bool:
    return all(p.in_B(ch) and not p.in_N(ch) for ch in word)


def sample_lexicon_words(
    sentences: Iterable[str], p: ScriptProfile, t: FilterThresholds = FilterThresholds()
) -> list[tuple[str, int]]:
    """Word types with frequency >= ``word_min_freq`` made only of native
    letters, most frequent first, ties in code point order."""
    freq = Counter(w for s in sentences for w in normalize(s).split())
    words = [(w, c) for w, c in freq.items() if c >= t.word_min_freq and _lexicon_eligible(w, p)]
    words.sort(key=lambda wc: (-wc[1], wc[0]))
    return words


def stem_heuristic(word: str) -> set[str]:
    """All prefixes of length at least ``max(2, len - 3)``."""
    if not word:
        raise ValueError("empty word has no stems")
    lo = min(len(word), max(2, len(word) - 3))
    return {word[:k] for k in range(lo, len(word) + 1)}


DEFAULT_SPLIT_SIZES = (25000, 2500, 2500)
# languages whose lexicon has fewer training words
_SPLIT_SIZES = {"sd": (15000, 2500, 2500)}


def split_sizes(language_tag: str) -> tuple[int, int, int]:
    """(train, dev, test) native word types for a language."""
    return _SPLIT_SIZES.get(language_tag, DEFAULT_SPLIT_SIZES)


class SplitError(ValueError):
    def __init__(self, message: str, conflict: list[set[str]]):
        self.conflict = conflict
        super().__init__(message)


@dataclass
class LexiconSplit:
    train: list[LexiconEntry]
    dev: list[LexiconEntry]
    test: list[LexiconEntry]


def _components(words: Sequence[str], stems: Mapping[str, set[str]]) -> list[list[str]]:
    parent = {w: w for w in words}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[str, str] = {}
    for w in words:
        for s in stems[w]:
            if s in owner:
                a, b = find(owner[s]), find(w)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[s] = w
    groups: dict[str, list[str]] = defaultdict(list)
    for w in words:
        groups[find(w)].append(w)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def split_lexicon(
    entries: Sequence[LexiconEntry],
    stems: Mapping[str, set[str]] | None = None,
    sizes: tuple[int, int, int] = DEFAULT_SPLIT_SIZES,
    seed: int = 0,
) -> LexiconSplit:
    """Partition entries by native word type into train/dev/test.

    Words linked through a shared stem form a component that is never split
    between training and validation (dev + test).  Validation is filled with
    whole components in a seeded random order; training takes up to
    ``sizes[0]`` of the remaining word types.
    """
    by_word: dict[str, list[LexiconEntry]] = defaultdict(list)
    for e in entries:
        by_word[e.native].append(e)
    words = sorted(by_word)
    if stems is None:
        stems = {w: stem_heuristic(w) for w in words}
    missing = [w for w in words if w not in stems]
    if missing:
        raise ValueError(f"no stems given for {len(missing)} words, e.g. {missing[0]!r}")
    n_train, n_dev, n_test = sizes
    n_val = n_dev + n_test
    comps = _components(words, stems)
    random.Random(seed).shuffle(comps)
    val: list[str] = []
    rest: list[list[str]] = []
    for comp in comps:
        if len(val) + len(comp) <= n_val:
            val.extend(comp)
        else:
            rest.append(comp)
    if len(val) < n_val:
        too_big = sorted(rest, key=len, reverse=True)[:5]
        raise SplitError(
            f"cannot fill {n_val} validation words with whole stem components (got {len(val)})",
            [set(c) for c in too_big],
        )
    train_words = [w for comp in rest for w in comp][:n_train]
    pick = lambda ws: [e for w in ws for e in by_word[w]]  # noqa: E731
    return LexiconSplit(pick(train_words), pick(val[:n_dev]), pick(val[n_dev:]))


def split_long_sentence(tokens: Sequence[str], max_tokens: int = 30) -> list[list[str]]:
    """Halve recursively (first half gets the extra token) until every piece
    has at most ``max_tokens`` tokens."""
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    tokens = list(tokens)
    if len(tokens) <= max_tokens:
        return [tokens]
    mid = (len(tokens) + 1) // 2
    return split_long_sentence(tokens[:mid], max_tokens) + split_long_sentence(tokens[mid:], max_tokens)
