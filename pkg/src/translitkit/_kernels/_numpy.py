"""Pure-numpy versions of the DP kernels.

Lattice recursions sweep anti-diagonals (cells on one anti-diagonal only
depend on the two previous ones), so each cell sees the same floating point
operations as the scalar loop.  The edit distance sweeps rows and resolves the
in-row insertion chain with a running minimum, which is exact on integers.
"""

import numpy as np

NEG_INF = -np.inf
SUB, DEL, INS = 0, 1, 2


def edit_ops(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    d[0] = np.arange(m + 1)
    offs = np.arange(m + 1)
    for i in range(1, n + 1):
        cand = np.empty(m + 1, dtype=np.int64)
        cand[0] = i
        cand[1:] = np.minimum(d[i - 1, :-1] + (hyp != ref[i - 1]), d[i - 1, 1:] + 1)
        d[i] = np.minimum.accumulate(cand - offs) + offs
    s = dl = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diag = int(ref[i - 1] != hyp[j - 1])
            if d[i - 1, j - 1] + diag == d[i, j]:
                s += diag
                i -= 1
                j -= 1
                continue
        if i > 0 and d[i - 1, j] + 1 == d[i, j]:
            dl += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, dl, ins


def _diag(d, n, m):
    ii = np.arange(max(0, d - m), min(n, d) + 1)
    return ii, d - ii


def lattice_forward(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    a = np.full((n + 1, m + 1), NEG_INF)
    a[0, 0] = 0.0
    # pad symbol arrays so that index -1 (i == 0 or j == 0) is harmless
    natp = np.concatenate((nat, [0]))
    latp = np.concatenate((lat, [0]))
    for d in range(1, n + m + 1):
        ii, jj = _diag(d, n, m)
        hi, hj = ii > 0, jj > 0
        x, y = natp[ii - 1], latp[jj - 1]
        acc = np.where(hi & hj, a[ii - 1, jj - 1] + logp[x, y], NEG_INF)
        acc = np.where(hi, np.logaddexp(acc, a[ii - 1, jj] + logp[x, 0]), acc)
        acc = np.where(hj, np.logaddexp(acc, a[ii, jj - 1] + logp[0, y]), acc)
        a[ii, jj] = acc
    return a


def lattice_backward(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    b = np.full((n + 2, m + 2), NEG_INF)
    b[n, m] = 0.0
    natp = np.concatenate((nat, [0]))
    latp = np.concatenate((lat, [0]))
    for d in range(n + m - 1, -1, -1):
        ii, jj = _diag(d, n, m)
        li, lj = ii < n, jj < m
        x, y = natp[ii], latp[jj]
        acc = np.where(li & lj, b[ii + 1, jj + 1] + logp[x, y], NEG_INF)
        acc = np.where(li, np.logaddexp(acc, b[ii + 1, jj] + logp[x, 0]), acc)
        acc = np.where(lj, np.logaddexp(acc, b[ii, jj + 1] + logp[0, y]), acc)
        b[ii, jj] = acc
    return b[: n + 1, : m + 1].copy()


def estep_batch(nat_flat, nat_off, lat_flat, lat_off, weights, logp):
    counts = np.zeros(logp.shape)
    log_z = np.empty(weights.shape[0])
    for e in range(weights.shape[0]):
        nat = nat_flat[nat_off[e]:nat_off[e + 1]]
        lat = lat_flat[lat_off[e]:lat_off[e + 1]]
        a = lattice_forward(nat, lat, logp)
        b = lattice_backward(nat, lat, logp)
        n, m = nat.shape[0], lat.shape[0]
        z = a[n, m]
        log_z[e] = z
        if z == NEG_INF:
            continue
        w = weights[e]
        sub = np.exp(a[:-1, :-1] + logp[np.ix_(nat, lat)] + b[1:, 1:] - z)
        np.add.at(counts, (nat[:, None], lat[None, :]), w * sub)
        dele = np.exp(a[:-1, :] + logp[nat, 0][:, None] + b[1:, :] - z)
        np.add.at(counts, (nat, 0), w * dele.sum(axis=1))
        ins = np.exp(a[:, :-1] + logp[0, lat][None, :] + b[:, 1:] - z)
        np.add.at(counts, (0, lat), w * ins.sum(axis=0))
    return counts, log_z


def viterbi_lattice(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    v = np.full((n + 1, m + 1), NEG_INF)
    bp = np.full((n + 1, m + 1), -1, dtype=np.int8)
    v[0, 0] = 0.0
    natp = np.concatenate((nat, [0]))
    latp = np.concatenate((lat, [0]))
    for d in range(1, n + m + 1):
        ii, jj = _diag(d, n, m)
        hi, hj = ii > 0, jj > 0
        x, y = natp[ii - 1], latp[jj - 1]
        both = hi & hj
        best = np.where(both, v[ii - 1, jj - 1] + logp[x, y], NEG_INF)
        arg = np.where(both, SUB, -1)
        cand = v[ii - 1, jj] + logp[x, 0]
        take = hi & ((cand > best) | (arg == -1))
        best = np.where(take, cand, best)
        arg = np.where(take, DEL, arg)
        cand = v[ii, jj - 1] + logp[0, y]
        take = hj & ((cand > best) | (arg == -1))
        best = np.where(take, cand, best)
        arg = np.where(take, INS, arg)
        v[ii, jj] = best
        bp[ii, jj] = arg
    moves = []
    i, j = n, m
    while i > 0 or j > 0:
        mv = bp[i, j]
        moves.append(mv)
        if mv == SUB:
            i -= 1
            j -= 1
        elif mv == DEL:
            i -= 1
        else:
            j -= 1
    return v[n, m], np.array(moves[::-1], dtype=np.int8)
