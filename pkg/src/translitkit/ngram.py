"""Back-off n-gram language models over arbitrary symbols.

Two estimators are provided: interpolated Witten-Bell (used for pair-symbol
transliteration models and character models) and Katz back-off with
Good-Turing discounting (used for word trigram models).  Both produce the
same :class:`NgramModel` representation, a table of log2 probabilities for
stored n-grams plus log2 back-off weights for contexts, which maps one-to-one
onto the ARPA format.

Sequences are padded with ``order - 1`` copies of :data:`BOS` and terminated
by one :data:`EOS`.  The vocabulary is closed over the training symbols plus
:data:`EOS` and :data:`UNK`; out-of-vocabulary symbols are scored as UNK.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence, TextIO

from .scriptdata import normalize

__all__ = [
    "BOS",
    "EOS",
    "UNK",
    "ArpaParseError",
    "NgramCounts",
    "NgramModel",
    "bits_per_character",
    "bits_to_rates",
    "count_ngrams",
    "read_arpa",
    "score",
    "train_katz",
    "train_witten_bell",
    "write_arpa",
]

log = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

LOG10_2 = math.log10(2.0)
# ARPA convention for n-grams that only serve as contexts (all-BOS tuples)
ARPA_PLACEHOLDER = -99.0
PLACEHOLDER_LOG2 = ARPA_PLACEHOLDER / LOG10_2

# leftover mass below this counts as "none left" for Katz
_MASS_EPS = 1e-12


class ArpaParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass
class NgramCounts:
    """Counts of all n-grams of orders ``1..order``.

    ``tables[n - 1]`` maps n-gram tuples to counts.  BOS is never a predicted
    symbol, so it only appears inside contexts.
    """

    order: int
    tables: list[Counter] = field(default_factory=list)

    def __getitem__(self, ngram: tuple) -> int:
        return self.tables[len(ngram) - 1].get(ngram, 0)

    def __iter__(self):
        for table in self.tables:
            yield from table.items()

    @property
    def num_sequences(self) -> int:
        return self.tables[0].get((EOS,), 0)

    def symbols(self) -> set:
        return {ng[0] for ng in self.tables[0]}


def count_ngrams(
    sequences: Iterable[Sequence[Hashable]],
    order: int,
    weights: Iterable[int] | None = None,
) -> NgramCounts:
    if order < 1:
        raise ValueError("order must be >= 1")
    tables = [Counter() for _ in range(order)]
    weights_iter = iter(weights) if weights is not None else None
    pad = (BOS,) * (order - 1)
    for seq in sequences:
        w = next(weights_iter) if weights_iter is not None else 1
        padded = pad + tuple(seq) + (EOS,)
        for t in range(order - 1, len(padded)):
            for n in range(1, order + 1):
                tables[n - 1][padded[t - n + 1 : t + 1]] += w
    return NgramCounts(order, tables)


class NgramModel:
    """Back-off n-gram model with log2 probabilities.

    ``prob`` maps stored n-grams to log2 P(last | rest); ``bow`` maps contexts
    to log2 back-off weights.  A missing back-off weight means 0 (weight 1).
    """

    def __init__(
        self,
        order: int,
        prob: dict[tuple, float],
        bow: dict[tuple, float],
        smoothing: str = "unknown",
        meta: dict[str, str] | None = None,
    ):
        self.order = order
        self.prob = prob
        self.bow = bow
        self.smoothing = smoothing
        self.meta = dict(meta or {})
        self.vocab = frozenset(ng[0] for ng in prob if len(ng) == 1 and ng[0] != BOS)
        if UNK not in self.vocab:
            raise ValueError("model has no UNK unigram")

    def __repr__(self):
        return (
            f"NgramModel(order={self.order}, smoothing={self.smoothing!r}, "
            f"vocab={len(self.vocab)}, ngrams={len(self.prob)})"
        )

    def contexts(self) -> list[tuple]:
        """Contexts with a stored distribution, the empty context included."""
        return [()] + sorted(self.bow, key=lambda h: (len(h), [str(s) for s in h]))

    def map_symbol(self, w):
        return w if w in self.vocab else UNK

    def logprob(self, context: Sequence, w) -> float:
        """log2 P(w | context); ``w`` must be in-vocabulary or EOS."""
        ctx = tuple(context[len(context) - self.order + 1 :]) if self.order > 1 else ()
        bo = 0.0
        prob = self.prob
        while True:
            p = prob.get(ctx + (w,))
            if p is not None:
                return bo + p
            if not ctx:
                return bo + prob[(UNK,)]
            bo += self.bow.get(ctx, 0.0)
            ctx = ctx[1:]

    def state_context(self, history: Sequence) -> tuple:
        """Longest suffix of ``history`` that is a stored context.

        Scores of any continuation depend on the history only through this
        suffix, so decoders can recombine on it.
        """
        h = tuple(history[len(history) - self.order + 1 :]) if self.order > 1 else ()
        while h and h not in self.bow:
            h = h[1:]
        return h

    def initial_context(self) -> tuple:
        return self.state_context((BOS,) * (self.order - 1))

    def context_mass(self, context: tuple) -> float:
        """Total probability over the full vocabulary (EOS included)."""
        return math.fsum(2.0 ** self.logprob(context, w) for w in self.vocab | {EOS})

    def score(self, sequence: Sequence, include_eos: bool = True) -> float:
        return score(self, sequence, include_eos)


def score(model: NgramModel, sequence: Sequence, include_eos: bool = True) -> float:
    """log2 probability of ``sequence`` with BOS padding and (optionally) EOS."""
    hist = [BOS] * (model.order - 1)
    total = 0.0
    for w in sequence:
        w = model.map_symbol(w)
        total += model.logprob(hist, w)
        hist.append(w)
    if include_eos:
        total += model.logprob(hist, EOS)
    return total


def _vocab_from_counts(counts: NgramCounts) -> list:
    vocab = counts.symbols() | {EOS, UNK}
    vocab.discard(BOS)
    return sorted(vocab, key=str)


def _group_by_context(table: Counter) -> dict[tuple, dict]:
    groups: dict[tuple, dict] = defaultdict(dict)
    for ng, c in table.items():
        groups[ng[:-1]][ng[-1]] = c
    return groups


def _add_bos_placeholders(prob: dict, order: int) -> None:
    for n in range(1, order):
        prob.setdefault((BOS,) * n, PLACEHOLDER_LOG2)


def train_witten_bell(counts: NgramCounts) -> NgramModel:
    """Interpolated Witten-Bell estimate.

    With ``c(h)`` tokens and ``T(h)`` distinct types after context ``h``::

        P(w|h) = (c(h, w) + T(h) * P(w|h')) / (c(h) + T(h))

    where ``h'`` drops the oldest symbol.  The recursion bottoms out in a
    uniform distribution over the vocabulary, which is where UNK gets its
    mass.
    """
    if not counts.tables or not counts.tables[0]:
        raise ValueError("cannot train on empty counts")
    vocab = _vocab_from_counts(counts)
    uniform = 1.0 / len(vocab)
    uni = counts.tables[0]
    total = sum(uni.values())
    types = len(uni)
    # plain (not log) probabilities of stored n-grams, filled order by order
    full: dict[tuple, float] = {}
    prob: dict[tuple, float] = {}
    for w in vocab:
        p = (uni.get((w,), 0) + types * uniform) / (total + types)
        full[(w,)] = p
        prob[(w,)] = math.log2(p)
    bow: dict[tuple, float] = {}
    bow_plain: dict[tuple, float] = {}

    def p_lower(h: tuple, w) -> float:
        # full model probability P(w|h) for a lower order, via back-off
        bo = 1.0
        while True:
            p = full.get(h + (w,))
            if p is not None:
                return bo * p
            bo *= bow_plain.get(h, 1.0)
            h = h[1:]

    for n in range(2, counts.order + 1):
        for h, conts in _group_by_context(counts.tables[n - 1]).items():
            c_h = sum(conts.values())
            t_h = len(conts)
            lam = t_h / (c_h + t_h)
            bow_plain[h] = lam
            bow[h] = math.log2(lam)
            for w, c in conts.items():
                p = (c + t_h * p_lower(h[1:], w)) / (c_h + t_h)
                full[h + (w,)] = p
                prob[h + (w,)] = math.log2(p)
    _add_bos_placeholders(prob, counts.order)
    return NgramModel(counts.order, prob, bow, "witten_bell")


def _good_turing_coeffs(table: Counter, gt_max: int, n: int) -> dict[int, float]:
    coc = Counter(table.values())
    n1 = coc.get(1, 0)
    if n1 == 0:
        log.info("order %d: no singletons, Good-Turing discounting disabled", n)
        return {}
    common = (gt_max + 1) * coc.get(gt_max + 1, 0) / n1
    if common >= 1.0:
        log.info("order %d: degenerate count-of-counts, discounting disabled", n)
        return {}
    coeffs = {}
    for r in range(1, gt_max + 1):
        nr = coc.get(r, 0)
        if nr == 0:
            continue
        r_star = (r + 1) * coc.get(r + 1, 0) / nr
        d = (r_star / r - common) / (1.0 - common)
        if not 0.0 < d <= 1.0:
            log.info("order %d: discount for count %d out of range (%g), not discounting it", n, r, d)
            continue
        coeffs[r] = d
    return coeffs


def _discounted(conts: dict, coeffs: dict[int, float], n_unseen: int) -> tuple[dict, float]:
    c_h = sum(conts.values())
    disc = {w: coeffs.get(c, 1.0) * c for w, c in conts.items()}
    denom = c_h
    if n_unseen and 1.0 - sum(disc.values()) / denom <= _MASS_EPS:
        # nothing left for unseen symbols: grow the denominator by one
        denom = c_h + 1
    probs = {w: d / denom for w, d in disc.items()}
    return probs, max(0.0, 1.0 - math.fsum(probs.values()))


def train_katz(counts: NgramCounts, gt_max: int = 5) -> NgramModel:
    """Katz back-off with Good-Turing discounting of counts up to ``gt_max``.

    Counts above ``gt_max`` keep their maximum-likelihood share.  Mass freed
    by discounting is handed to unseen symbols in proportion to the next
    lower order.  At the unigram level it goes to the unseen vocabulary
    (normally just UNK) uniformly.  No observed n-gram is pruned.
    """
    if not counts.tables or not counts.tables[0]:
        raise ValueError("cannot train on empty counts")
    vocab = _vocab_from_counts(counts)
    vsize = len(vocab)
    prob: dict[tuple, float] = {}
    bow: dict[tuple, float] = {}
    full: dict[tuple, float] = {}
    bow_plain: dict[tuple, float] = {}

    uni_conts = {ng[0]: c for ng, c in counts.tables[0].items()}
    coeffs = _good_turing_coeffs(counts.tables[0], gt_max, 1)
    n_unseen = vsize - len(uni_conts)
    probs, left = _discounted(uni_conts, coeffs, n_unseen)
    for w in vocab:
        p = probs[w] if w in probs else left / n_unseen
        full[(w,)] = p
        prob[(w,)] = math.log2(p)

    def p_full(h: tuple, w) -> float:
        bo = 1.0
        while True:
            p = full.get(h + (w,))
            if p is not None:
                return bo * p
            bo *= bow_plain.get(h, 1.0)
            h = h[1:]

    for n in range(2, counts.order + 1):
        coeffs = _good_turing_coeffs(counts.tables[n - 1], gt_max, n)
        for h, conts in _group_by_context(counts.tables[n - 1]).items():
            n_unseen = vsize - len(conts)
            probs, left = _discounted(conts, coeffs, n_unseen)
            if n_unseen:
                lower_seen = math.fsum(p_full(h[1:], w) for w in conts)
                alpha = left / (1.0 - lower_seen)
            else:
                alpha = 1.0
            bow_plain[h] = alpha
            bow[h] = math.log2(alpha)
            for w, p in probs.items():
                full[h + (w,)] = p
                prob[h + (w,)] = math.log2(p)
    _add_bos_placeholders(prob, counts.order)
    return NgramModel(counts.order, prob, bow, "katz", {"gt_max": str(gt_max)})


def bits_per_character(
    model: NgramModel,
    corpus: Sequence[str],
    denominator_corpus: Sequence[str] | None = None,
) -> tuple[float, float]:
    """Return ``(BPC, BPNC)`` of a character model on ``corpus``.

    Each line is one sequence of characters (NFC, spaces included).  The
    numerator is the total negative log2 probability including EOS; BPC
    divides by the characters of ``corpus`` and BPNC by those of the
    line-aligned ``denominator_corpus`` (the native-script side).
    """
    if denominator_corpus is None:
        denominator_corpus = corpus
    if len(corpus) != len(denominator_corpus):
        raise ValueError(
            f"line count mismatch: {len(corpus)} evaluation lines vs {len(denominator_corpus)} denominator lines"
        )
    bits = 0.0
    n_chars = 0
    for line in corpus:
        line = normalize(line)
        bits -= score(model, list(line))
        n_chars += len(line)
    n_denom = sum(len(normalize(line)) for line in denominator_corpus)
    return bits_to_rates(bits, n_chars, n_denom)


def bits_to_rates(total_bits: float, n_chars: int, n_native_chars: int) -> tuple[float, float]:
    """``(BPC, BPNC)``: the same total divided by two character counts."""
    return total_bits / max(n_chars, 1), total_bits / max(n_native_chars, 1)


def uniform_model(symbols: Iterable[Hashable]) -> NgramModel:
    """Unigram model, uniform over ``symbols`` plus EOS and UNK."""
    vocab = set(symbols) | {EOS, UNK}
    lp = -math.log2(len(vocab))
    return NgramModel(1, {(w,): lp for w in vocab}, {}, "uniform")


# --- ARPA serialization ---------------------------------------------------

_ESC_RE = re.compile(r"\\(\\|u[0-9a-fA-F]{4}|U[0-9a-fA-F]{8})")


def _escape(sym) -> str:
    s = str(sym)
    if not s:
        raise ValueError("empty symbol cannot be written to ARPA")
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch.isspace() or not ch.isprintable():
            cp = ord(ch)
            out.append(f"\\u{cp:04x}" if cp <= 0xFFFF else f"\\U{cp:08x}")
        else:
            out.append(ch)
    return "".join(out)


def _unescape(tok: str) -> str:
    def sub(m):
        g = m.group(1)
        return "\\" if g == "\\" else chr(int(g[1:], 16))

    return _ESC_RE.sub(sub, tok)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_arpa(model: NgramModel, dest: str | Path | TextIO) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            write_arpa(model, fh)
        return
    by_order: list[list[tuple]] = [[] for _ in range(model.order)]
    for ng in model.prob:
        by_order[len(ng) - 1].append(ng)
    dest.write(f"# smoothing={model.smoothing}\n")
    dest.write(f"# order={model.order}\n")
    for k, v in sorted(model.meta.items()):
        dest.write(f"# {k}={v}\n")
    dest.write("\n\\data\\\n")
    for n, ngs in enumerate(by_order, 1):
        dest.write(f"ngram {n}={len(ngs)}\n")
    for n, ngs in enumerate(by_order, 1):
        dest.write(f"\n\\{n}-grams:\n")
        for ng in sorted(ngs, key=lambda g: [str(s) for s in g]):
            lp = model.prob[ng]
            p10 = ARPA_PLACEHOLDER if lp == PLACEHOLDER_LOG2 else lp * LOG10_2
            fields = [_fmt(p10), " ".join(_escape(s) for s in ng)]
            if ng in model.bow:
                fields.append(_fmt(model.bow[ng] * LOG10_2))
            dest.write("\t".join(fields) + "\n")
    dest.write("\n\\end\\\n")


def read_arpa(src: str | Path | TextIO) -> NgramModel:
    if isinstance(src, (str, Path)):
        with open(src, encoding="utf-8") as fh:
            return read_arpa(fh)
    meta: dict[str, str] = {}
    declared: dict[int, int] = {}
    prob: dict[tuple, float] = {}
    bow: dict[tuple, float] = {}
    seen: Counter = Counter()
    state = "header"
    cur = 0
    lineno = 0
    for lineno, raw in enumerate(src, 1):
        line = raw.strip()
        if state == "header":
            if line.startswith("#") and "=" in line:
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v.strip()
            elif line == "\\data\\":
                state = "data"
            continue
        if not line:
            continue
        if line == "\\end\\":
            state = "end"
            break
        m = re.fullmatch(r"\\(\d+)-grams:", line)
        if m:
            n = int(m.group(1))
            if n not in declared:
                raise ArpaParseError(f"section \\{n}-grams: not declared in \\data\\", lineno)
            if n != cur + 1:
                raise ArpaParseError(f"expected \\{cur + 1}-grams: section, got \\{n}-grams:", lineno)
            cur = n
            state = "grams"
            continue
        if state == "data":
            m = re.fullmatch(r"ngram\s+(\d+)\s*=\s*(\d+)", line)
            if not m:
                raise ArpaParseError(f"malformed \\data\\ line {line!r}", lineno)
            declared[int(m.group(1))] = int(m.group(2))
            continue
        toks = line.split()
        if len(toks) not in (cur + 1, cur + 2):
            raise ArpaParseError(f"expected {cur} symbols in {cur}-gram line, got {line!r}", lineno)
        try:
            p10 = float(toks[0])
            b10 = float(toks[cur + 1]) if len(toks) == cur + 2 else None
        except ValueError:
            raise ArpaParseError(f"bad number in {line!r}", lineno) from None
        ng = tuple(_unescape(t) for t in toks[1 : cur + 1])
        prob[ng] = PLACEHOLDER_LOG2 if p10 == ARPA_PLACEHOLDER else p10 / LOG10_2
        if b10 is not None:
            bow[ng] = b10 / LOG10_2
        seen[cur] += 1
    if state == "header":
        raise ArpaParseError("missing \\data\\ section", lineno)
    if not declared:
        raise ArpaParseError("\\data\\ section declares no n-gram counts", lineno)
    order = max(declared)
    for n in range(1, order + 1):
        if n not in declared:
            raise ArpaParseError(f"\\data\\ section lacks ngram {n}=", lineno)
        if n > cur:
            raise ArpaParseError(f"missing \\{n}-grams: section", lineno)
        if seen[n] != declared[n]:
            raise ArpaParseError(
                f"\\{n}-grams: has {seen[n]} entries but \\data\\ declares {declared[n]}", lineno
            )
    if state != "end":
        raise ArpaParseError("missing \\end\\ marker", lineno)
    smoothing = meta.pop("smoothing", "unknown")
    meta.pop("order", None)
    return NgramModel(order, prob, bow, smoothing, meta)
