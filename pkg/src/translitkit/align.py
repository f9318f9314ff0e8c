"""Character alignment of romanization lexicon entries.

Each entry (native word, romanization) is aligned as a monotone sequence of
unit pairs ``n:l`` where either side may be empty (written ``_``).  A
memoryless pair distribution is trained with forward-backward EM over every
entry's alignment lattice, weighted by attestation counts, and the Viterbi
path under that distribution gives the pair-symbol string used to train the
joint n-gram model.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from ._kernels import DEL, SUB
from .scriptdata import normalize

__all__ = [
    "AlignmentError",
    "AlignmentLattice",
    "AlignmentModel",
    "LexiconEntry",
    "PairSymbol",
    "alignment_lattice",
    "em_train",
    "format_pairs",
    "lattice_posteriors",
    "parse_pairs",
    "project",
    "read_lexicon",
    "viterbi_align",
    "write_lexicon",
]

log = logging.getLogger(__name__)

EPS_MARK = "_"


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PairSymbol:
    """One aligned unit; ``""`` stands for the empty side."""

    native: str
    latin: str

    def __post_init__(self):
        if len(self.native) > 1 or len(self.latin) > 1:
            raise ValueError(f"pair sides must be single code points: {self.native!r}:{self.latin!r}")
        if not self.native and not self.latin:
            raise ValueError("the empty pair _:_ is not a symbol")

    def __str__(self):
        return f"{self.native or EPS_MARK}:{self.latin or EPS_MARK}"

    @classmethod
    def parse(cls, token: str) -> "PairSymbol":
        if len(token) != 3 or token[1] != ":":
            raise ValueError(f"malformed pair symbol {token!r}")
        n, l = token[0], token[2]
        return cls("" if n == EPS_MARK else n, "" if l == EPS_MARK else l)

    def side(self, which: str) -> str:
        return self.native if which == "native" else self.latin


PairSequence = tuple  # tuple[PairSymbol, ...]


def format_pairs(seq: Iterable[PairSymbol]) -> str:
    return " ".join(str(p) for p in seq)


def parse_pairs(line: str) -> PairSequence:
    return tuple(PairSymbol.parse(tok) for tok in line.split())


def project(seq: Iterable[PairSymbol]) -> tuple[str, str]:
    seq = list(seq)
    return "".join(p.native for p in seq), "".join(p.latin for p in seq)


@dataclass(frozen=True)
class LexiconEntry:
    native: str
    latin: str
    attestations: int = 1

    def __post_init__(self):
        if not self.native or not self.latin:
            raise ValueError(f"empty side in lexicon entry {self.native!r}/{self.latin!r}")
        if self.attestations < 1:
            raise ValueError(f"attestations must be >= 1 for {self.native!r}/{self.latin!r}")


def read_lexicon(path: str | Path) -> list[LexiconEntry]:
    """Read a ``native<TAB>latin[<TAB>count]`` lexicon file."""
    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), 1):
            if not row or not row[0].strip():
                continue
            if len(row) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
            count = int(row[2]) if len(row) == 3 else 1
            entries.append(LexiconEntry(normalize(row[0].strip()), row[1].strip().lower(), count))
    return entries


def write_lexicon(entries: Iterable[LexiconEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.native}\t{e.latin}\t{e.attestations}\n")


# --- lattice ---------------------------------------------------------------


@dataclass(frozen=True)
class AlignmentLattice:
    """Grid DAG over positions ``(i, j)``; ``i`` indexes the native word.

    Edges from ``(i, j)``: ``(i+1, j+1)`` for ``n_i:l_j``, ``(i+1, j)`` for
    ``n_i:_`` and ``(i, j+1)`` for ``_:l_j``.
    """

    native: str
    latin: str

    @property
    def source(self) -> tuple[int, int]:
        return (0, 0)

    @property
    def sink(self) -> tuple[int, int]:
        return (len(self.native), len(self.latin))

    def out_edges(self, node: tuple[int, int]) -> list[tuple[PairSymbol, tuple[int, int]]]:
        i, j = node
        n, m = self.sink
        edges = []
        if i < n and j < m:
            edges.append((PairSymbol(self.native[i], self.latin[j]), (i + 1, j + 1)))
        if i < n:
            edges.append((PairSymbol(self.native[i], ""), (i + 1, j)))
        if j < m:
            edges.append((PairSymbol("", self.latin[j]), (i, j + 1)))
        return edges

    def edges(self) -> Iterator[tuple[tuple[int, int], PairSymbol, tuple[int, int]]]:
        n, m = self.sink
        for i in range(n + 1):
            for j in range(m + 1):
                for sym, dst in self.out_edges((i, j)):
                    yield (i, j), sym, dst

    def paths(self) -> Iterator[PairSequence]:
        """Every source-to-sink path (exponential; for small inputs)."""

        def walk(node):
            if node == self.sink:
                yield ()
                return
            for sym, dst in self.out_edges(node):
                for rest in walk(dst):
                    yield (sym,) + rest

        yield from walk(self.source)

    def symbols(self) -> set[PairSymbol]:
        return {sym for _, sym, _ in self.edges()}


def alignment_lattice(native: str, latin: str) -> AlignmentLattice:
    if not native or not latin:
        raise AlignmentError(f"cannot align empty string: {native!r}/{latin!r}")
    return AlignmentLattice(native, latin)


# --- model -------------------------------------------------------------------


@dataclass
class AlignmentModel:
    """Memoryless distribution over pair symbols.

    ``logp[a, b]`` is the natural-log probability of the pair
    ``native_symbols[a]:latin_symbols[b]``; index 0 on either axis is the
    empty side and ``logp[0, 0]`` is always ``-inf``.
    """

    native_symbols: list[str]
    latin_symbols: list[str]
    logp: np.ndarray
    loglik_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._nat_index = {c: k for k, c in enumerate(self.native_symbols) if k}
        self._lat_index = {c: k for k, c in enumerate(self.latin_symbols) if k}

    @property
    def pair_prob(self) -> dict[PairSymbol, float]:
        probs = {}
        for a, b in zip(*np.nonzero(np.isfinite(self.logp))):
            probs[PairSymbol(self.native_symbols[a], self.latin_symbols[b])] = float(np.exp(self.logp[a, b]))
        return probs

    def encode(self, native: str, latin: str) -> tuple[np.ndarray, np.ndarray]:
        try:
            nat = np.array([self._nat_index[c] for c in native], dtype=np.int64)
            lat = np.array([self._lat_index[c] for c in latin], dtype=np.int64)
        except KeyError as exc:
            raise AlignmentError(f"symbol {exc.args[0]!r} unknown to the alignment model") from None
        return nat, lat

    def decode_moves(self, native: str, latin: str, moves: Sequence[int]) -> PairSequence:
        out = []
        i = j = 0
        for mv in moves:
            if mv == SUB:
                out.append(PairSymbol(native[i], latin[j]))
                i += 1
                j += 1
            elif mv == DEL:
                out.append(PairSymbol(native[i], ""))
                i += 1
            else:
                out.append(PairSymbol("", latin[j]))
                j += 1
        return tuple(out)


def _alphabets(entries: Sequence[LexiconEntry]) -> tuple[list[str], list[str]]:
    nat = sorted({c for e in entries for c in e.native})
    lat = sorted({c for e in entries for c in e.latin})
    return [""] + nat, [""] + lat


def _pack(entries: Sequence[LexiconEntry], model: AlignmentModel):
    nats, lats = zip(*(model.encode(e.native, e.latin) for e in entries))
    nat_off = np.zeros(len(entries) + 1, dtype=np.int64)
    lat_off = np.zeros(len(entries) + 1, dtype=np.int64)
    nat_off[1:] = np.cumsum([len(x) for x in nats])
    lat_off[1:] = np.cumsum([len(x) for x in lats])
    return np.concatenate(nats), nat_off, np.concatenate(lats), lat_off


def _uniform_init(entries: Sequence[LexiconEntry], nat_syms: list[str], lat_syms: list[str]) -> np.ndarray:
    ni = {c: k for k, c in enumerate(nat_syms)}
    li = {c: k for k, c in enumerate(lat_syms)}
    mask = np.zeros((len(nat_syms), len(lat_syms)), dtype=bool)
    for e in entries:
        a = [ni[c] for c in set(e.native)]
        b = [li[c] for c in set(e.latin)]
        mask[np.ix_(a, b)] = True
        mask[a, 0] = True
        mask[0, b] = True
    logp = np.full(mask.shape, -np.inf)
    logp[mask] = -math.log(mask.sum())
    return logp


def em_train(
    entries: Sequence[LexiconEntry],
    max_iter: int = 50,
    tol: float = 1e-6,
) -> AlignmentModel:
    """Fit pair probabilities by forward-backward EM.

    Each entry's expected pair counts are weighted by its attestations.
    ``loglik_trace[t]`` is the weighted corpus log-likelihood (natural log)
    of the t-th model; the returned model is the last one in the trace.
    Training stops once the relative change drops below ``tol``.
    """
    entries = list(entries)
    if not entries:
        raise AlignmentError("no lexicon entries to train on")
    nat_syms, lat_syms = _alphabets(entries)
    model = AlignmentModel(nat_syms, lat_syms, _uniform_init(entries, nat_syms, lat_syms))
    packed = _pack(entries, model)
    weights = np.array([e.attestations for e in entries], dtype=np.float64)
    prev = None
    for it in range(max_iter + 1):
        counts, log_z = _kernels.estep_batch(*packed, weights, model.logp)
        bad = np.flatnonzero(~np.isfinite(log_z))
        if bad.size:
            e = entries[bad[0]]
            raise AlignmentError(f"entry {e.native!r}/{e.latin!r} has zero probability under the model")
        ll = float(np.dot(weights, log_z))
        model.loglik_trace.append(ll)
        log.debug("EM iteration %d: loglik %.6f", it, ll)
        if prev is not None and abs(ll - prev) <= tol * abs(ll):
            break
        if it == max_iter:
            break
        prev = ll
        total = counts.sum()
        with np.errstate(divide="ignore"):
            logp = np.log(counts / total)
        logp[0, 0] = -np.inf
        model.logp = logp
    return model


def lattice_posteriors(entry: LexiconEntry, model: AlignmentModel) -> dict[str, np.ndarray | float]:
    """Edge posteriors of one entry's lattice.

    Returns arrays ``sub`` (n, m), ``del`` (n, m + 1) and ``ins`` (n + 1, m),
    indexed by the edge's source node, plus the forward total at the sink
    and backward total at the source (both natural log).
    """
    nat, lat = model.encode(entry.native, entry.latin)
    a = _kernels.lattice_forward(nat, lat, model.logp)
    b = _kernels.lattice_backward(nat, lat, model.logp)
    lp = model.logp
    z = a[-1, -1]
    return {
        "sub": np.exp(a[:-1, :-1] + lp[np.ix_(nat, lat)] + b[1:, 1:] - z),
        "del": np.exp(a[:-1, :] + lp[nat, 0][:, None] + b[1:, :] - z),
        "ins": np.exp(a[:, :-1] + lp[0, lat][None, :] + b[:, 1:] - z),
        "forward": float(z),
        "backward": float(b[0, 0]),
    }


def path_logprob(seq: Iterable[PairSymbol], model: AlignmentModel) -> float:
    total = 0.0
    for p in seq:
        a = model._nat_index.get(p.native, 0) if p.native else 0
        b = model._lat_index.get(p.latin, 0) if p.latin else 0
        if (p.native and not a) or (p.latin and not b):
            return -math.inf
        total += model.logp[a, b]
    return float(total)


def viterbi_align(entry: LexiconEntry, model: AlignmentModel) -> PairSequence:
    """Most probable alignment path.

    On equal scores the substitution edge wins over the deletion edge, which
    wins over the insertion edge.
    """
    nat, lat = model.encode(entry.native, entry.latin)
    best, moves = _kernels.viterbi_lattice(nat, lat, model.logp)
    if not np.isfinite(best):
        raise AlignmentError(f"entry {entry.native!r}/{entry.latin!r} has no finite-probability alignment")
    return model.decode_moves(entry.native, entry.latin, moves)


def align_lexicon(entries: Sequence[LexiconEntry], model: AlignmentModel) -> list[PairSequence]:
    return [viterbi_align(e, model) for e in entries]
