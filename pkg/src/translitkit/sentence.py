"""Full-sentence Latin-to-native transliteration.

A romanized sentence is split into lowercase ``a-z`` words and pass-through
material (anything else, split at whitespace).  Each word gets a k-best list
from the pair decoder; a word trigram model then picks the assignment that
maximizes::

    sum(channel log2 score) + lm_weight * log2 P_LM(native token sequence)

Pass-through tokens keep the LM chain intact by entering it as UNK.  The
search is an exact dynamic program over the LM's recombinable context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .ngram import EOS, UNK, NgramModel
from .scriptdata import ScriptProfile, bhat_segments, deterministic_latinize, normalize
from .simulate import WordRomanizer
from .translit import KBestList, PairDecoder, UnknownSymbolError

__all__ = [
    "Candidate",
    "SentenceDecoding",
    "SentenceLattice",
    "Token",
    "TokenizedSentence",
    "build_lattice",
    "decode_lattice",
    "decode_sentence",
    "passthrough_reassemble",
    "simulate_parallel_corpus",
    "tokenize_romanized",
]

LATIN_WORD = "latin_word"
PASSTHROUGH = "passthrough"


class Token(NamedTuple):
    text: str  # lowercased for latin words
    kind: str
    raw: str  # exactly as in the input


@dataclass(frozen=True)
class TokenizedSentence:
    """Tokens plus the ``len(tokens) + 1`` separators around them."""

    tokens: tuple[Token, ...]
    separators: tuple[str, ...]

    def __post_init__(self):
        if len(self.separators) != len(self.tokens) + 1:
            raise ValueError("need exactly one more separator than tokens")

    @property
    def latin_words(self) -> list[str]:
        return [t.text for t in self.tokens if t.kind == LATIN_WORD]

    def reassemble(self, replacements: Sequence[str] | None = None) -> str:
        """Join tokens and separators; ``replacements`` (one per latin word)
        substitute the latin words when given."""
        it = iter(replacements) if replacements is not None else None
        parts = [self.separators[0]]
        for tok, sep in zip(self.tokens, self.separators[1:]):
            parts.append(next(it) if it is not None and tok.kind == LATIN_WORD else tok.raw)
            parts.append(sep)
        return "".join(parts)


_TOKEN = re.compile(r"[A-Za-z]+|[^A-Za-z\s]+")


def tokenize_romanized(text: str) -> TokenizedSentence:
    tokens, seps, pos = [], [], 0
    for m in _TOKEN.finditer(text):
        seps.append(text[pos : m.start()])
        raw = m.group()
        if raw[0].isascii() and raw[0].isalpha():
            tokens.append(Token(raw.lower(), LATIN_WORD, raw))
        else:
            tokens.append(Token(raw, PASSTHROUGH, raw))
        pos = m.end()
    seps.append(text[pos:])
    return TokenizedSentence(tuple(tokens), tuple(seps))


def passthrough_reassemble(s: TokenizedSentence, native_words: Sequence[str]) -> str:
    n = len(s.latin_words)
    if len(native_words) != n:
        raise ValueError(f"sentence has {n} latin words but {len(native_words)} native words were given")
    return s.reassemble(native_words)


# --- lattice and decoding ----------------------------------------------------


class Candidate(NamedTuple):
    text: str
    channel: float  # log2 channel score, 0 for pass-through


@dataclass
class SentenceLattice:
    sentence: TokenizedSentence
    candidates: list[list[Candidate]]
    fallbacks: list[int] = field(default_factory=list)  # token indices


def build_lattice(s: TokenizedSentence, d: PairDecoder, k: int = 8) -> SentenceLattice:
    if k < 1:
        raise ValueError("k must be >= 1")
    if d.direction != "latin_to_native":
        raise ValueError("sentence decoding needs a latin_to_native decoder")
    cands, fallbacks = [], []
    for i, tok in enumerate(s.tokens):
        if tok.kind == PASSTHROUGH:
            cands.append([Candidate(tok.raw, 0.0)])
            continue
        try:
            kb: KBestList = d.transliterate(tok.text, k)
            cands.append([Candidate(h.output, h.log2_score) for h in kb])
        except UnknownSymbolError:
            fallbacks.append(i)
            cands.append([Candidate(tok.raw, 0.0)])
    return SentenceLattice(s, cands, fallbacks)


@dataclass
class SentenceDecoding:
    text: str
    words: list[str]  # one native word per latin word
    log2_score: float
    fallbacks: list[str]  # latin words copied through unchanged


def _lm_symbol(lm: NgramModel, lat: SentenceLattice, i: int, word: str) -> str:
    if lat.sentence.tokens[i].kind == PASSTHROUGH or i in lat.fallbacks:
        return UNK
    return lm.map_symbol(word)


def decode_lattice(lat: SentenceLattice, lm: NgramModel, lm_weight: float = 1.0) -> tuple[list[str], float]:
    """Best token assignment and its combined log2 score.

    States are reduced LM contexts; ties keep the earlier candidate.
    """
    # state -> (score, backpointer chain)
    beam: dict[tuple, tuple[float, tuple | None]] = {lm.initial_context(): (0.0, None)}
    for i, cands in enumerate(lat.candidates):
        nxt: dict[tuple, tuple[float, tuple | None]] = {}
        for ctx, (sc, back) in beam.items():
            for c in cands:
                sym = _lm_symbol(lm, lat, i, c.text)
                total = sc + c.channel + lm_weight * lm.logprob(ctx, sym)
                nctx = lm.state_context(ctx + (sym,))
                old = nxt.get(nctx)
                if old is None or total > old[0]:
                    nxt[nctx] = (total, (c.text, back))
        beam = nxt
    best_sc, best_back = None, None
    for ctx, (sc, back) in beam.items():
        total = sc + lm_weight * lm.logprob(ctx, EOS)
        if best_sc is None or total > best_sc:
            best_sc, best_back = total, back
    words = []
    while best_back is not None:
        w, best_back = best_back
        words.append(w)
    return words[::-1], best_sc


def decode_sentence(
    s: TokenizedSentence | str,
    d: PairDecoder,
    lm: NgramModel,
    k: int = 8,
    lm_weight: float = 1.0,
) -> SentenceDecoding:
    if isinstance(s, str):
        s = tokenize_romanized(s)
    lat = build_lattice(s, d, k)
    assignment, total = decode_lattice(lat, lm, lm_weight)
    native = [w for w, tok in zip(assignment, s.tokens) if tok.kind == LATIN_WORD]
    return SentenceDecoding(
        passthrough_reassemble(s, native),
        native,
        total,
        [s.tokens[i].text for i in lat.fallbacks],
    )


# --- simulated parallel data -------------------------------------------------

_NON_AZ = re.compile(r"[^a-z]+")
PARALLEL_MODES = ("whitespace", "full_string")


@dataclass
class ParallelCorpus:
    pairs: list[tuple[str, str]]  # (romanized, native)
    skipped: dict[str, int]

    def to_tsv(self) -> str:
        return "".join(f"{r}\t{n}\n" for r, n in self.pairs)


def simulate_parallel_corpus(
    native_corpus: Iterable[str],
    reverse_decoder: PairDecoder,
    profile: ScriptProfile,
    mode: str = "whitespace",
    k: int = 8,
    seed: int = 0,
) -> ParallelCorpus:
    """Romanize native sentences by sampling each word instance from its
    k-best list.

    ``whitespace`` mode lowercases and reduces everything outside ``a-z`` to
    single spaces; ``full_string`` keeps non-word material after its
    deterministic romanization (e.g. Danda to period).
    """
    if mode not in PARALLEL_MODES:
        raise ValueError(f"mode must be one of {PARALLEL_MODES}")
    if not profile.lexicon_block:
        raise ValueError("profile has an empty lexicon-covered set; build it with with_lexicon")
    rom = WordRomanizer(reverse_decoder, k)
    skipped: dict[str, int] = {}
    pairs = []
    for i, line in enumerate(native_corpus):
        line = normalize(line.rstrip("\n"))
        rng = np.random.default_rng([seed, i])
        parts = []
        for piece, is_word in bhat_segments(line, profile):
            if is_word:
                out = rom.sample(piece, rng)
                if out is None:
                    skipped[piece] = skipped.get(piece, 0) + 1
                    out = piece
                parts.append(out)
            else:
                parts.append(deterministic_latinize(piece, profile))
        romanized = "".join(parts)
        if mode == "whitespace":
            romanized = _NON_AZ.sub(" ", romanized.lower()).strip()
        pairs.append((romanized, line))
    return ParallelCorpus(pairs, skipped)
