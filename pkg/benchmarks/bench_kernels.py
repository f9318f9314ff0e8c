"""Compare the numba and numpy kernel backends.

Times edit_ops, lattice_forward, viterbi_lattice and estep_batch on random
inputs of typical word length, checks that both backends return the same
numbers, and prints a table.  The first numba call (JIT compilation) runs
as warm-up and is not timed.

    python benchmarks/bench_kernels.py --entries 2000 --repeat 5
"""

import argparse
import timeit

import numpy as np

from translitkit._kernels import available_backends, get_backend


def make_inputs(rng, entries, n_nat, n_lat, max_len):
    w = rng.random((n_nat + 1, n_lat + 1))
    w[0, 0] = 0.0
    with np.errstate(divide="ignore"):
        logp = np.log(w / w.sum())
    nats = [rng.integers(1, n_nat + 1, rng.integers(1, max_len + 1)) for _ in range(entries)]
    lats = [rng.integers(1, n_lat + 1, rng.integers(1, max_len + 1)) for _ in range(entries)]
    return logp, nats, lats


def offsets(xs):
    return np.concatenate([[0], np.cumsum([len(x) for x in xs])]).astype(np.int64)


def workloads(logp, nats, lats):
    flat = (np.concatenate(nats), offsets(nats), np.concatenate(lats), offsets(lats), np.ones(len(nats)), logp)
    return {
        "edit_ops": lambda k: [k.edit_ops(a, b) for a, b in zip(nats, lats)],
        "lattice_forward": lambda k: [k.lattice_forward(a, b, logp)[-1, -1] for a, b in zip(nats, lats)],
        "viterbi_lattice": lambda k: [k.viterbi_lattice(a, b, logp)[0] for a, b in zip(nats, lats)],
        "estep_batch": lambda k: k.estep_batch(*flat),
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x, y))
    return np.allclose(np.asarray(x, float), np.asarray(y, float), rtol=1e-10, atol=1e-12)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entries", type=int, default=2000)
    ap.add_argument("--max-len", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    logp, nats, lats = make_inputs(rng, args.entries, 40, 26, args.max_len)
    backends = {name: get_backend(name) for name in available_backends()}
    print(f"{args.entries} entries, lengths 1..{args.max_len}, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}  agree")
    for label, fn in workloads(logp, nats, lats).items():
        results = {name: fn(k) for name, k in backends.items()}  # also warms up the JIT
        times = {
            name: min(timeit.repeat(lambda k=k: fn(k), number=1, repeat=args.repeat)) for name, k in backends.items()
        }
        vals = list(results.values())
        agree = all(same(v, vals[0]) for v in vals[1:])
        speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        row = "".join(f"{times[n] * 1e3:>10.1f}ms" for n in backends)
        print(f"{label:<18}{row}{speedup:>9.1f}x  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
