"""Slow reference implementations used as test oracles.

None of these share code paths with the library's dynamic programs: they
enumerate or recurse directly over the definitions.
"""

from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

from translitkit.align import LexiconEntry, PairSymbol
from translitkit.ngram import BOS, EOS, UNK, count_ngrams, score, train_katz, train_witten_bell


def edit_distance(a, b) -> int:
    """Levenshtein distance by plain recursion on suffixes."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            go(i + 1, j + 1) + (a[i] != b[j]),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )

    return go(0, 0)


# --- pair decoder ------------------------------------------------------------


def _side_split(sym: str, direction: str) -> tuple[str, str]:
    p = PairSymbol.parse(sym)
    if direction == "latin_to_native":
        return p.latin, p.native
    return p.native, p.latin


def enumerate_decodings(lm, text: str, direction: str = "latin_to_native", max_ins: int = 3) -> dict[str, float]:
    """Best path score for every reachable output, by depth-first search over
    all pair sequences whose input side spells ``text``."""
    syms = sorted(lm.vocab - {UNK, EOS})
    split = {s: _side_split(s, direction) for s in syms}
    best: dict[str, float] = {}

    def dfs(pos, ins, hist, out, sc):
        if pos == len(text):
            total = sc + lm.logprob(hist, EOS)
            if total > best.get(out, -math.inf):
                best[out] = total
        for s in syms:
            i, o = split[s]
            if i:
                if pos < len(text) and text[pos] == i:
                    dfs(pos + 1, 0, hist + [s], out + o, sc + lm.logprob(hist, s))
            elif ins < max_ins:
                dfs(pos, ins + 1, hist + [s], out + o, sc + lm.logprob(hist, s))

    dfs(0, 0, [BOS] * (lm.order - 1), "", 0.0)
    return best


def ranked(best: dict[str, float]) -> list[tuple[str, float]]:
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


def random_pair_model(rng: random.Random, n_in: int = 3, n_out: int = 3, order: int | None = None, smoothing=None):
    """A pair n-gram model trained on random pair sequences.

    Latin side is the input alphabet ``a b c``; native side uses ``x y z``.
    Returns ``(model, input_alphabet)``.
    """
    lat = "abc"[:n_in]
    nat = "xyz"[:n_out]
    pairs = [f"{n}:{l}" for n in nat for l in lat]
    pairs += [f"{n}:_" for n in nat] + [f"_:{l}" for l in lat]
    chosen = [p for p in pairs if rng.random() < 0.5]
    # every input letter must be consumable
    for l in lat:
        if not any(p.endswith(":" + l) for p in chosen):
            chosen.append(f"{rng.choice(nat)}:{l}")
    seqs = [[rng.choice(chosen) for _ in range(rng.randint(1, 5))] for _ in range(rng.randint(3, 12))]
    seqs.append(rng.sample(chosen, len(chosen)))
    order = order or rng.choice([2, 3])
    counts = count_ngrams(seqs, order)
    smoothing = smoothing or rng.choice(["wb", "katz"])
    model = train_witten_bell(counts) if smoothing == "wb" else train_katz(counts)
    return model, lat


def random_lexicon(rng: random.Random, n_entries: int = 10, max_len: int = 5) -> list[LexiconEntry]:
    nat, lat = "xyzw", "abcd"
    out = []
    for _ in range(rng.randint(1, n_entries)):
        n = "".join(rng.choice(nat) for _ in range(rng.randint(1, max_len)))
        l = "".join(rng.choice(lat) for _ in range(rng.randint(1, max_len)))
        out.append(LexiconEntry(n, l, rng.randint(1, 3)))
    return out


# --- noisy channel -----------------------------------------------------------


def brute_noisy_channel(candidates, is_passthrough, lm, lm_weight: float):
    """Best assignment over every combination of per-token candidates.

    ``candidates[i]`` is a list of ``(text, channel_log2)``; pass-through
    tokens enter the LM as UNK.  The LM score is computed on the full token
    sequence from scratch for each assignment.
    """
    best = None
    for combo in itertools.product(*candidates):
        lm_seq = [UNK if pt else c[0] for c, pt in zip(combo, is_passthrough)]
        total = sum(c[1] for c in combo) + lm_weight * score(lm, lm_seq)
        if best is None or total > best[1]:
            best = ([c[0] for c in combo], total)
    return best
