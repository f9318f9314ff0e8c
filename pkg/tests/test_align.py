import math
import random

import numpy as np
import pytest

from translitkit.align import (
    AlignmentError,
    LexiconEntry,
    PairSymbol,
    align_lexicon,
    alignment_lattice,
    em_train,
    format_pairs,
    lattice_posteriors,
    parse_pairs,
    path_logprob,
    project,
    read_lexicon,
    viterbi_align,
    write_lexicon,
)

from oracles import random_lexicon

TEMPLE = "டெம்பிள்"
TEMPLE_ALIGNMENT = "ட:t ெ:e ம:m ்:_ ப:p ி:_ ள:l ்:e"


def P(s):
    return PairSymbol.parse(s)


def is_lattice_path(native, latin, seq):
    lat = alignment_lattice(native, latin)
    node = lat.source
    for sym in seq:
        nxt = [dst for s, dst in lat.out_edges(node) if s == sym]
        if not nxt:
            return False
        node = nxt[0]
    return node == lat.sink


class TestPairSymbols:
    def test_round_trip(self):
        seq = parse_pairs(TEMPLE_ALIGNMENT)
        assert format_pairs(seq) == TEMPLE_ALIGNMENT
        assert project(seq) == (TEMPLE, "temple")

    def test_empty_pair_rejected(self):
        with pytest.raises(ValueError):
            PairSymbol("", "")

    def test_multi_char_rejected(self):
        with pytest.raises(ValueError):
            PairSymbol("ab", "x")


class TestLexiconIO:
    def test_round_trip(self, tmp_path):
        entries = [LexiconEntry("அகதிகள்", "agathigal", 2), LexiconEntry("அகதிகள்", "akathigal", 1)]
        write_lexicon(entries, tmp_path / "lex.tsv")
        assert read_lexicon(tmp_path / "lex.tsv") == entries

    def test_default_count_and_lowercase(self, tmp_path):
        (tmp_path / "lex.tsv").write_text("டெம்பிள்\tTemple\n", encoding="utf-8")
        assert read_lexicon(tmp_path / "lex.tsv") == [LexiconEntry(TEMPLE, "temple", 1)]

    def test_bad_row(self, tmp_path):
        (tmp_path / "lex.tsv").write_text("a\n", encoding="utf-8")
        with pytest.raises(ValueError, match="lex.tsv:1"):
            read_lexicon(tmp_path / "lex.tsv")

    def test_invalid_entries(self):
        with pytest.raises(ValueError):
            LexiconEntry("", "a")
        with pytest.raises(ValueError):
            LexiconEntry("a", "b", 0)


class TestLattice:
    def test_path_lengths(self):
        lengths = {len(p) for p in alignment_lattice("ab", "xy").paths()}
        assert min(lengths) == 2 and max(lengths) == 4

    def test_single_char(self):
        paths = set(alignment_lattice("a", "a").paths())
        assert paths == {(P("a:a"),), (P("a:_"), P("_:a")), (P("_:a"), P("a:_"))}

    def test_path_count_is_delannoy(self):
        # D(3, 2) = 25
        assert sum(1 for _ in alignment_lattice("abc", "xy").paths()) == 25

    def test_temple_alignment_is_a_path(self):
        assert is_lattice_path(TEMPLE, "temple", parse_pairs(TEMPLE_ALIGNMENT))

    def test_empty_side(self):
        with pytest.raises(AlignmentError):
            alignment_lattice("", "a")


class TestEM:
    def test_single_entry_prefers_substitution(self):
        m = em_train([LexiconEntry("a", "x")])
        probs = m.pair_prob
        assert probs[P("a:x")] > 0.99
        assert viterbi_align(LexiconEntry("a", "x"), m) == (P("a:x"),)

    def test_attestation_weight_is_linear(self):
        a = em_train([LexiconEntry("ab", "xy", 2), LexiconEntry("b", "y")], max_iter=3)
        b = em_train([LexiconEntry("ab", "xy"), LexiconEntry("ab", "xy"), LexiconEntry("b", "y")], max_iter=3)
        np.testing.assert_allclose(a.logp, b.logp, rtol=1e-12)

    def test_symmetry(self):
        m = em_train([LexiconEntry("ab", "ab"), LexiconEntry("ba", "ba")])
        probs = m.pair_prob
        assert probs[P("a:a")] == pytest.approx(probs[P("b:b")], rel=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_loglik_monotone(self, seed):
        m = em_train(random_lexicon(random.Random(seed)), max_iter=30, tol=0.0)
        trace = m.loglik_trace
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_converges_and_stops(self):
        m = em_train([LexiconEntry("ab", "xy"), LexiconEntry("ba", "yx")], max_iter=200, tol=1e-6)
        assert len(m.loglik_trace) < 201

    def test_probabilities_normalized(self):
        m = em_train(random_lexicon(random.Random(4)))
        assert math.fsum(m.pair_prob.values()) == pytest.approx(1.0, abs=1e-12)

    def test_empty_lexicon(self):
        with pytest.raises(AlignmentError):
            em_train([])

    def test_temple_lexicon(self):
        entries = [
            LexiconEntry(TEMPLE, "tempil", 1),
            LexiconEntry(TEMPLE, "temple", 3),
            LexiconEntry("அகதிகள்", "agathigal", 2),
            LexiconEntry("அகதிகள்", "akathigal", 1),
        ]
        m = em_train(entries)
        for e, seq in zip(entries, align_lexicon(entries, m)):
            assert project(seq) == (e.native, e.latin)
        assert math.isfinite(path_logprob(parse_pairs(TEMPLE_ALIGNMENT), m))


class TestPosteriors:
    @pytest.mark.parametrize("seed", range(5))
    def test_match_path_enumeration(self, seed):
        rng = random.Random(seed)
        entries = random_lexicon(rng, n_entries=6, max_len=3)
        m = em_train(entries, max_iter=3)
        for e in entries:
            post = lattice_posteriors(e, m)
            paths = list(alignment_lattice(e.native, e.latin).paths())
            weights = np.array([math.exp(path_logprob(p, m)) for p in paths])
            z = weights.sum()
            assert math.log(z) == pytest.approx(post["forward"], rel=1e-10)
            assert post["forward"] == pytest.approx(post["backward"], rel=1e-10)
            # out of the source exactly one edge is taken
            src = post["sub"][0, 0] + post["del"][0, 0] + post["ins"][0, 0]
            assert src == pytest.approx(1.0, abs=1e-9)
            # edge marginals equal path-weighted edge counts
            sub = np.zeros_like(post["sub"])
            for p, w in zip(paths, weights):
                i = j = 0
                for s in p:
                    if s.native and s.latin:
                        sub[i, j] += w / z
                    i += bool(s.native)
                    j += bool(s.latin)
            np.testing.assert_allclose(post["sub"], sub, atol=1e-12)


class TestViterbi:
    def test_single_pair_beats_two_epsilons(self):
        m = em_train([LexiconEntry("a", "x"), LexiconEntry("ab", "xy")])
        seq = viterbi_align(LexiconEntry("a", "x"), m)
        assert seq == (P("a:x"),)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_enumeration(self, seed):
        rng = random.Random(100 + seed)
        entries = random_lexicon(rng, n_entries=5, max_len=4)
        m = em_train(entries, max_iter=5)
        for e in entries:
            best = max(path_logprob(p, m) for p in alignment_lattice(e.native, e.latin).paths())
            seq = viterbi_align(e, m)
            assert project(seq) == (e.native, e.latin)
            assert path_logprob(seq, m) == pytest.approx(best, rel=1e-12)

    def test_unknown_symbol(self):
        m = em_train([LexiconEntry("a", "x")])
        with pytest.raises(AlignmentError):
            viterbi_align(LexiconEntry("q", "x"), m)
