"""Single-word transliteration with a joint pair n-gram model.

The pair model is an n-gram model whose symbols are aligned unit pairs
``n:l``.  Decoding an input string searches over pair sequences whose input
side spells the input, scoring each with the pair model (EOS included); the
output side of the best sequences are the transliterations.  The same model
decodes in either direction by choosing which side is the input.

Search state is ``(position, LM context, consecutive insertions)`` where the
LM context is reduced to the longest stored context, so recombination is
exact.  Each state keeps its ``k`` best distinct output prefixes, which makes
the k-best list over distinct outputs exact when no beam is applied.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .align import (
    AlignmentModel,
    LexiconEntry,
    PairSymbol,
    align_lexicon,
    em_train,
)
from .ngram import BOS, EOS, UNK, NgramModel, count_ngrams, score, train_witten_bell

__all__ = [
    "DIRECTIONS",
    "Hypothesis",
    "KBestList",
    "PairDecoder",
    "UnknownSymbolError",
    "score_pair_sequence",
    "train_pair_model",
    "transliterate",
]

log = logging.getLogger(__name__)

DIRECTIONS = ("latin_to_native", "native_to_latin")
_ALIASES = {"latin2native": "latin_to_native", "native2latin": "native_to_latin"}


class UnknownSymbolError(ValueError):
    def __init__(self, symbol: str, direction: str):
        self.symbol = symbol
        super().__init__(f"symbol {symbol!r} (U+{ord(symbol):04X}) never appears on the {direction} input side")


@dataclass(frozen=True)
class Hypothesis:
    output: str
    log2_score: float
    pairs: tuple = field(default=(), compare=False, repr=False)


@dataclass
class KBestList:
    hypotheses: list[Hypothesis]

    def __len__(self):
        return len(self.hypotheses)

    def __iter__(self):
        return iter(self.hypotheses)

    def __getitem__(self, i):
        return self.hypotheses[i]

    @property
    def best(self) -> Hypothesis:
        return self.hypotheses[0]

    def outputs(self) -> list[str]:
        return [h.output for h in self.hypotheses]


def _unwind(node) -> tuple:
    out = []
    while node is not None:
        sym, node = node
        out.append(sym)
    return tuple(reversed(out))


class PairDecoder:
    """k-best transliteration over a pair n-gram model.

    Parameters
    ----------
    pair_lm
        n-gram model over pair-symbol strings such as ``"क:k"`` or ``"्:_"``.
    direction
        ``"latin_to_native"`` or ``"native_to_latin"``.
    max_consec_insertions
        Cap on consecutive pairs with an empty input side.
    beam_width
        Number of search states kept per layer, or ``None`` for exact search.
    """

    def __init__(
        self,
        pair_lm: NgramModel,
        direction: str = "latin_to_native",
        max_consec_insertions: int = 3,
        beam_width: int | None = None,
    ):
        direction = _ALIASES.get(direction, direction)
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if beam_width is not None and beam_width < 1:
            raise ValueError("beam_width must be positive or None")
        self.pair_lm = pair_lm
        self.direction = direction
        self.max_consec_insertions = max_consec_insertions
        self.beam_width = beam_width
        in_side, out_side = ("latin", "native") if direction == "latin_to_native" else ("native", "latin")
        self.consuming: dict[str, list[tuple[str, str]]] = {}
        self.inserting: list[tuple[str, str]] = []
        for sym in sorted(pair_lm.vocab - {EOS, UNK, BOS}):
            pair = PairSymbol.parse(sym)
            inp, out = pair.side(in_side), pair.side(out_side)
            if inp:
                self.consuming.setdefault(inp, []).append((sym, out))
            else:
                self.inserting.append((sym, out))
        self._lp_cache: dict = {}
        self._ctx_cache: dict = {}

    def reversed(self) -> "PairDecoder":
        other = "native_to_latin" if self.direction == "latin_to_native" else "latin_to_native"
        return PairDecoder(self.pair_lm, other, self.max_consec_insertions, self.beam_width)

    def input_alphabet(self) -> set[str]:
        return set(self.consuming)

    def _step(self, ctx: tuple, sym: str) -> tuple[float, tuple]:
        key = (ctx, sym)
        hit = self._lp_cache.get(key)
        if hit is None:
            lp = self.pair_lm.logprob(ctx, sym)
            nxt = self.pair_lm.state_context(ctx + (sym,)) if sym != EOS else ()
            hit = self._lp_cache[key] = (lp, nxt)
        return hit

    def _prune(self, states: dict, k: int) -> dict:
        trimmed = {}
        for st, hyps in states.items():
            if len(hyps) > k:
                hyps = dict(sorted(hyps.items(), key=lambda kv: (-kv[1][0], kv[0]))[:k])
            trimmed[st] = hyps
        if self.beam_width is not None and len(trimmed) > self.beam_width:
            ranked = sorted(trimmed.items(), key=lambda kv: -max(v[0] for v in kv[1].values()))
            trimmed = dict(ranked[: self.beam_width])
        return trimmed

    @staticmethod
    def _push(states: dict, state, output: str, sc: float, node) -> None:
        hyps = states.setdefault(state, {})
        old = hyps.get(output)
        if old is None or sc > old[0]:
            hyps[output] = (sc, node)

    def transliterate(self, text: str, k: int = 1) -> KBestList:
        if not text:
            raise ValueError("cannot transliterate an empty string")
        if k < 1:
            raise ValueError("k must be >= 1")
        for ch in text:
            if ch not in self.consuming:
                raise UnknownSymbolError(ch, self.direction.split("_")[0])
        n = len(text)
        max_ins = self.max_consec_insertions
        # layers[pos][ins] : state ctx -> {output: (score, path node)}
        nxt_layer: list[dict] = [dict() for _ in range(max_ins + 1)]
        nxt_layer[0][self.pair_lm.initial_context()] = {"": (0.0, None)}
        finals: dict[str, tuple[float, object]] = {}
        for pos in range(n + 1):
            layer, nxt_layer = nxt_layer, [dict() for _ in range(max_ins + 1)]
            for lev in range(max_ins + 1):
                states = self._prune(layer[lev], k)
                for ctx, hyps in states.items():
                    for out, (sc, node) in hyps.items():
                        if lev < max_ins:
                            for sym, o in self.inserting:
                                lp, nctx = self._step(ctx, sym)
                                self._push(layer[lev + 1], nctx, out + o, sc + lp, (sym, node))
                        if pos < n:
                            for sym, o in self.consuming[text[pos]]:
                                lp, nctx = self._step(ctx, sym)
                                self._push(nxt_layer[0], nctx, out + o, sc + lp, (sym, node))
                        else:
                            lp, _ = self._step(ctx, EOS)
                            total = sc + lp
                            old = finals.get(out)
                            if old is None or total > old[0]:
                                finals[out] = (total, node)
        ranked = sorted(finals.items(), key=lambda kv: (-kv[1][0], kv[0]))[:k]
        return KBestList([Hypothesis(out, sc, _unwind(node)) for out, (sc, node) in ranked])


def transliterate(d: PairDecoder, text: str, k: int = 1) -> KBestList:
    return d.transliterate(text, k)


def score_pair_sequence(d: PairDecoder | NgramModel, seq: Sequence[PairSymbol | str]) -> float:
    lm = d.pair_lm if isinstance(d, PairDecoder) else d
    return score(lm, [str(p) for p in seq])


def train_pair_model(
    entries: Sequence[LexiconEntry],
    order: int = 6,
    max_iter: int = 50,
    tol: float = 1e-6,
) -> tuple[NgramModel, AlignmentModel, list[tuple]]:
    """Align the lexicon with EM and fit a Witten-Bell pair n-gram model.

    Each entry's alignment is counted once per attestation.
    """
    align_model = em_train(entries, max_iter=max_iter, tol=tol)
    alignments = align_lexicon(entries, align_model)
    counts = count_ngrams(
        ([str(p) for p in seq] for seq in alignments),
        order,
        weights=(e.attestations for e in entries),
    )
    lm = train_witten_bell(counts)
    lm.meta.update({"model": "pair", "em_iterations": str(len(align_model.loglik_trace) - 1)})
    return lm, align_model, alignments


def transliterate_batch(
    d: PairDecoder, words: Iterable[str], k: int = 1
) -> list[KBestList | UnknownSymbolError]:
    out: list[KBestList | UnknownSymbolError] = []
    for w in words:
        try:
            out.append(d.transliterate(w, k))
        except UnknownSymbolError as exc:
            out.append(exc)
    return out


def softmax_weights(scores: Sequence[float]) -> list[float]:
    """Renormalize log2 scores into probabilities."""
    top = max(scores)
    w = [2.0 ** (s - top) for s in scores]
    z = math.fsum(w)
    return [x / z for x in w]
