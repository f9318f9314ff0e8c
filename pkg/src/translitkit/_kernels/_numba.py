"""Scalar-loop DP kernels compiled with numba."""

import numpy as np
from numba import njit

NEG_INF = -np.inf

# edge codes shared by both backends
SUB, DEL, INS = 0, 1, 2


@njit(cache=True)
def edit_ops(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    for i in range(n + 1):
        d[i, 0] = i
    for j in range(m + 1):
        d[0, j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = d[i - 1, j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            if d[i - 1, j] + 1 < best:
                best = d[i - 1, j] + 1
            if d[i, j - 1] + 1 < best:
                best = d[i, j - 1] + 1
            d[i, j] = best
    s = 0
    dl = 0
    ins = 0
    i = n
    j = m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diag = 0 if ref[i - 1] == hyp[j - 1] else 1
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


@njit(cache=True)
def lattice_forward(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    a = np.full((n + 1, m + 1), NEG_INF)
    a[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            acc = NEG_INF
            if i > 0 and j > 0:
                acc = a[i - 1, j - 1] + logp[nat[i - 1], lat[j - 1]]
            if i > 0:
                acc = np.logaddexp(acc, a[i - 1, j] + logp[nat[i - 1], 0])
            if j > 0:
                acc = np.logaddexp(acc, a[i, j - 1] + logp[0, lat[j - 1]])
            a[i, j] = acc
    return a


@njit(cache=True)
def lattice_backward(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    b = np.full((n + 1, m + 1), NEG_INF)
    b[n, m] = 0.0
    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if i == n and j == m:
                continue
            acc = NEG_INF
            if i < n and j < m:
                acc = b[i + 1, j + 1] + logp[nat[i], lat[j]]
            if i < n:
                acc = np.logaddexp(acc, b[i + 1, j] + logp[nat[i], 0])
            if j < m:
                acc = np.logaddexp(acc, b[i, j + 1] + logp[0, lat[j]])
            b[i, j] = acc
    return b


@njit(cache=True)
def estep_batch(nat_flat, nat_off, lat_flat, lat_off, weights, logp):
    counts = np.zeros(logp.shape)
    n_entries = weights.shape[0]
    log_z = np.empty(n_entries)
    for e in range(n_entries):
        nat = nat_flat[nat_off[e]:nat_off[e + 1]]
        lat = lat_flat[lat_off[e]:lat_off[e + 1]]
        a = lattice_forward(nat, lat, logp)
        b = lattice_backward(nat, lat, logp)
        n = nat.shape[0]
        m = lat.shape[0]
        z = a[n, m]
        log_z[e] = z
        if z == NEG_INF:
            continue
        w = weights[e]
        for i in range(n + 1):
            for j in range(m + 1):
                if i > 0 and j > 0:
                    x, y = nat[i - 1], lat[j - 1]
                    counts[x, y] += w * np.exp(a[i - 1, j - 1] + logp[x, y] + b[i, j] - z)
                if i > 0:
                    x = nat[i - 1]
                    counts[x, 0] += w * np.exp(a[i - 1, j] + logp[x, 0] + b[i, j] - z)
                if j > 0:
                    y = lat[j - 1]
                    counts[0, y] += w * np.exp(a[i, j - 1] + logp[0, y] + b[i, j] - z)
    return counts, log_z


@njit(cache=True)
def viterbi_lattice(nat, lat, logp):
    n = nat.shape[0]
    m = lat.shape[0]
    v = np.full((n + 1, m + 1), NEG_INF)
    bp = np.full((n + 1, m + 1), -1, dtype=np.int8)
    v[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = NEG_INF
            arg = -1
            if i > 0 and j > 0:
                best = v[i - 1, j - 1] + logp[nat[i - 1], lat[j - 1]]
                arg = SUB
            if i > 0:
                cand = v[i - 1, j] + logp[nat[i - 1], 0]
                if cand > best or arg == -1:
                    best = cand
                    arg = DEL
            if j > 0:
                cand = v[i, j - 1] + logp[0, lat[j - 1]]
                if cand > best or arg == -1:
                    best = cand
                    arg = INS
            v[i, j] = best
            bp[i, j] = arg
    moves = np.empty(n + m, dtype=np.int8)
    k = 0
    i = n
    j = m
    while i > 0 or j > 0:
        mv = bp[i, j]
        moves[k] = mv
        k += 1
        if mv == SUB:
            i -= 1
            j -= 1
        elif mv == DEL:
            i -= 1
        else:
            j -= 1
    return v[n, m], moves[:k][::-1].copy()
