"""Romanized training corpora simulated from native-script text.

Every maximal run of lexicon-covered characters (``B_hat``) is romanized
with a native-to-Latin pair decoder; everything else is left untouched.
Two modes:

``viterbi``
    each word type is decoded once and all instances get its 1-best output;
``sampled``
    each instance is drawn independently from the renormalized k-best list.

With ``copies > 1`` the corpus is replicated before sampling, so every copy
is sampled independently.  Randomness comes from one generator per
``(copy, line)`` derived from the seed, so output does not depend on how
lines are scheduled across workers.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .scriptdata import ScriptProfile, bhat_segments, normalize
from .translit import KBestList, PairDecoder, UnknownSymbolError, softmax_weights

__all__ = [
    "REPLACEMENT_CHAR",
    "SimulationConfig",
    "SimulationResult",
    "WordRomanizer",
    "rare_char_replace",
    "rare_chars",
    "romanize_corpus",
]

log = logging.getLogger(__name__)

REPLACEMENT_CHAR = "\ufffd"
MODES = ("viterbi", "sampled")


@dataclass(frozen=True)
class SimulationConfig:
    mode: str = "viterbi"
    copies: int = 1
    k: int = 8
    min_char_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.min_char_count < 1:
            raise ValueError("min_char_count must be >= 1")


class WordRomanizer:
    """Caches k-best lists per word type and draws romanizations from them."""

    def __init__(self, decoder: PairDecoder, k: int):
        if decoder.direction != "native_to_latin":
            raise ValueError("romanization needs a native_to_latin decoder")
        self.decoder = decoder
        self.k = k
        self._cache: dict[str, tuple[list[str], list[float]] | None] = {}

    def kbest(self, word: str) -> tuple[list[str], list[float]] | None:
        if word not in self._cache:
            try:
                res: KBestList = self.decoder.transliterate(normalize(word), self.k)
                self._cache[word] = (res.outputs(), softmax_weights([h.log2_score for h in res]))
            except UnknownSymbolError:
                self._cache[word] = None
        return self._cache[word]

    def best(self, word: str) -> str | None:
        hit = self.kbest(word)
        return None if hit is None else hit[0][0]

    def sample(self, word: str, rng: np.random.Generator) -> str | None:
        hit = self.kbest(word)
        if hit is None:
            return None
        outs, probs = hit
        if len(outs) == 1:
            return outs[0]
        return outs[int(rng.choice(len(outs), p=probs))]


def _romanize_line(
    line: str,
    profile: ScriptProfile,
    pick,
    skipped: Counter,
) -> str:
    parts = []
    for piece, is_word in bhat_segments(line, profile):
        if not is_word:
            parts.append(piece)
            continue
        rom = pick(piece)
        if rom is None:
            skipped[piece] += 1
            parts.append(piece)
        else:
            parts.append(rom)
    return "".join(parts)


@dataclass
class SimulationResult:
    lines: list[str]
    config: SimulationConfig
    input_lines: int
    undecodable: Counter = field(default_factory=Counter)
    replaced_chars: dict[str, int] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "config": asdict(self.config),
            "input_lines": self.input_lines,
            "output_lines": len(self.lines),
            "undecodable_instances": sum(self.undecodable.values()),
            "undecodable_types": len(self.undecodable),
            "replaced_chars": {f"U+{ord(c):04X}": n for c, n in sorted(self.replaced_chars.items())},
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), ensure_ascii=False, indent=2, sort_keys=True)


def romanize_corpus(
    native_corpus: Sequence[str],
    decoder: PairDecoder,
    cfg: SimulationConfig,
    profile: ScriptProfile,
) -> SimulationResult:
    """Romanize every line ``cfg.copies`` times (copy-major order)."""
    if not profile.lexicon_block:
        raise ValueError("profile has an empty lexicon-covered set; build it with with_lexicon")
    rom = WordRomanizer(decoder, 1 if cfg.mode == "viterbi" else cfg.k)
    result = SimulationResult([], cfg, len(native_corpus))
    if cfg.mode == "viterbi":
        # seed-independent: identical for every copy
        once = [_romanize_line(line, profile, rom.best, result.undecodable) for line in native_corpus]
        for _ in range(cfg.copies):
            result.lines.extend(once)
        for w in list(result.undecodable):
            result.undecodable[w] *= cfg.copies
    else:
        for c in range(cfg.copies):
            for i, line in enumerate(native_corpus):
                rng = np.random.default_rng([cfg.seed, c, i])
                result.lines.append(
                    _romanize_line(line, profile, lambda w: rom.sample(w, rng), result.undecodable)
                )
    if result.undecodable:
        log.warning(
            "%d word instances (%d types) could not be romanized and were copied verbatim",
            sum(result.undecodable.values()),
            len(result.undecodable),
        )
    return result


def rare_chars(train_corpus: Iterable[str], min_count: int = 2) -> dict[str, int]:
    """Characters seen fewer than ``min_count`` times in ``train_corpus``
    (with their counts); only characters that actually occur are listed."""
    counts = Counter(ch for line in train_corpus for ch in line)
    return {ch: n for ch, n in counts.items() if n < min_count and ch != "\n"}


def rare_char_replace(
    train_corpus: Sequence[str], eval_corpus: Sequence[str], min_count: int = 2
) -> tuple[list[str], list[str]]:
    """Replace characters rarer than ``min_count`` in training by U+FFFD.

    Counts come from the training corpus only, so characters that never
    occur in training are replaced in the evaluation corpus too.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter(ch for line in train_corpus for ch in line)

    def fix(line: str) -> str:
        return "".join(ch if counts[ch] >= min_count or ch == "\n" else REPLACEMENT_CHAR for ch in line)

    return [fix(x) for x in train_corpus], [fix(x) for x in eval_corpus]
