"""Both kernel backends must agree with each other and with slow oracles."""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from translitkit import _kernels
from translitkit._kernels import DEL, INS, SUB, available_backends, get_backend

from oracles import edit_distance

BACKENDS = available_backends()


def _random_logp(rng, a, l):
    w = rng.random((a + 1, l + 1)) * (rng.random((a + 1, l + 1)) < 0.8)
    w[0, 0] = 0.0
    w[1:, 1:] += 1e-3  # keep every substitution possible
    with np.errstate(divide="ignore"):
        lp = np.log(w / w.sum())
    lp[0, 0] = -np.inf
    return lp


def test_numba_is_available():
    assert "numba" in BACKENDS and "numpy" in BACKENDS


def test_env_flag_selects_numpy():
    code = "from translitkit import _kernels; print(_kernels.BACKEND_NAME)"
    env = dict(os.environ, TRANSLITKIT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env.pop("TRANSLITKIT_DISABLE_NUMBA")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("fortran")


@pytest.mark.parametrize("name", BACKENDS)
class TestEditOps:
    def test_small_exhaustive(self, name):
        k = get_backend(name)
        words = ["".join(p) for n in range(4) for p in itertools.product("ab", repeat=n)]
        for a, b in itertools.product(words, repeat=2):
            r = np.array([ord(c) for c in a], dtype=np.int64)
            h = np.array([ord(c) for c in b], dtype=np.int64)
            s, d, i = k.edit_ops(r, h)
            assert s + d + i == edit_distance(a, b)
            assert d - i == len(a) - len(b)

    def test_tie_break_prefers_substitution(self, name):
        k = get_backend(name)
        # "ab" -> "ba": two substitutions or one deletion + one insertion
        assert tuple(k.edit_ops(np.array([1, 2]), np.array([2, 1]))) == (2, 0, 0)

    def test_empty(self, name):
        k = get_backend(name)
        e = np.zeros(0, dtype=np.int64)
        assert tuple(k.edit_ops(e, np.array([1, 2, 3]))) == (0, 0, 3)
        assert tuple(k.edit_ops(np.array([1, 2]), e)) == (0, 2, 0)


def test_backends_agree_on_random_edits():
    rng = np.random.default_rng(0)
    nb, npy = get_backend("numba"), get_backend("numpy")
    for _ in range(200):
        r = rng.integers(0, 4, rng.integers(0, 12))
        h = rng.integers(0, 4, rng.integers(0, 12))
        assert tuple(nb.edit_ops(r, h)) == tuple(npy.edit_ops(r, h))


def test_backends_agree_on_lattices():
    rng = np.random.default_rng(1)
    nb, npy = get_backend("numba"), get_backend("numpy")
    for _ in range(100):
        A, L = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        lp = _random_logp(rng, A, L)
        nat = rng.integers(1, A + 1, rng.integers(1, 6))
        lat = rng.integers(1, L + 1, rng.integers(1, 6))
        fa, fb = nb.lattice_forward(nat, lat, lp), npy.lattice_forward(nat, lat, lp)
        ba, bb = nb.lattice_backward(nat, lat, lp), npy.lattice_backward(nat, lat, lp)
        np.testing.assert_allclose(fa, fb, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(ba, bb, rtol=1e-12, atol=1e-12)
        assert fa[-1, -1] == pytest.approx(ba[0, 0], rel=1e-12)
        sa, ma = nb.viterbi_lattice(nat, lat, lp)
        sb, mb = npy.viterbi_lattice(nat, lat, lp)
        assert sa == sb and list(ma) == list(mb)


def test_estep_batch_matches_single_entries():
    rng = np.random.default_rng(2)
    lp = _random_logp(rng, 3, 3)
    nats = [rng.integers(1, 4, rng.integers(1, 5)) for _ in range(4)]
    lats = [rng.integers(1, 4, rng.integers(1, 5)) for _ in range(4)]
    w = np.array([1.0, 2.0, 1.0, 3.0])
    off = lambda xs: np.concatenate([[0], np.cumsum([len(x) for x in xs])]).astype(np.int64)  # noqa: E731
    args = (np.concatenate(nats), off(nats), np.concatenate(lats), off(lats), w, lp)
    for name in BACKENDS:
        counts, log_z = get_backend(name).estep_batch(*args)
        # expected number of pairs per entry is at least max(len) and the
        # total weight-scaled counts must cover every consumed symbol
        assert counts.shape == lp.shape
        nat_total = counts[1:, :].sum()
        assert nat_total == pytest.approx(sum(wi * len(x) for wi, x in zip(w, nats)), rel=1e-10)
        lat_total = counts[:, 1:].sum()
        assert lat_total == pytest.approx(sum(wi * len(x) for wi, x in zip(w, lats)), rel=1e-10)
        for k in range(4):
            z = get_backend(name).lattice_forward(nats[k], lats[k], lp)[-1, -1]
            assert log_z[k] == pytest.approx(z, rel=1e-12)


def test_viterbi_move_codes():
    assert (SUB, DEL, INS) == (0, 1, 2)
    assert _kernels.BACKEND_NAME in BACKENDS


def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path

    script = Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(script))
    mod["main"](["--entries", "5", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "estep_batch" in out and " NO" not in out
