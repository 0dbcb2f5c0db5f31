"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

Backend selection: set CAYEXP_BACKEND=numpy to force the numpy path, anything
else (or unset) uses numba when it is importable. The choice only affects
speed; both paths compute the same quantities, and per-element work is
ordered identically so results are deterministic for a fixed backend.
``bench/benchmark.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("CAYEXP_BACKEND", "").strip().lower()
if _requested == "numpy":
    _use_numba = False
else:
    # workqueue is available everywhere and keeps thread scheduling simple
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    try:
        from numba import njit, prange
        _use_numba = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _use_numba = False

BACKEND = "numba" if _use_numba else "numpy"


# ---------------------------------------------------------------------------
# Cayley matvec: y[i] = sum_j w[j] * x[tables[j, i]]
# (equals (M_S x)[i] for symmetric multisets)

def _matvec_numpy(tables, weights, x):
    y = np.zeros_like(x)
    for j in range(tables.shape[0]):
        y += weights[j] * x[tables[j]]
    return y


if _use_numba:
    @njit(cache=True, parallel=True)
    def _matvec_numba(tables, weights, x):
        k, n = tables.shape
        y = np.zeros(n, dtype=np.float64)
        for i in prange(n):
            acc = 0.0
            for j in range(k):
                acc += weights[j] * x[tables[j, i]]
            y[i] = acc
        return y


def cayley_matvec(tables, weights, x):
    tables = np.ascontiguousarray(tables)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _use_numba:
        return _matvec_numba(tables, weights, x)
    return _matvec_numpy(tables, weights, x)


# ---------------------------------------------------------------------------
# dense normalized adjacency fill: M[i, tables[j, i]] += w[j]

def _dense_fill_numpy(tables, weights, n):
    m = np.zeros((n, n), dtype=np.float64)
    rows = np.arange(n)
    for j in range(tables.shape[0]):
        np.add.at(m, (rows, tables[j]), weights[j])
    return m


if _use_numba:
    @njit(cache=True, parallel=True)
    def _dense_fill_numba(tables, weights, n):
        k = tables.shape[0]
        m = np.zeros((n, n), dtype=np.float64)
        for i in prange(n):
            for j in range(k):
                m[i, tables[j, i]] += weights[j]
        return m


def dense_adjacency(tables, weights, n):
    tables = np.ascontiguousarray(tables)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if _use_numba:
        return _dense_fill_numba(tables, weights, n)
    return _dense_fill_numpy(tables, weights, n)


# ---------------------------------------------------------------------------
# direct character sums over a product of cyclic groups
#
# points:  (P, L) integer coordinates, weights: (P,)
# betas:   (B, L) character indices
# moduli:  (L,) coordinate moduli
# roots:   concatenated exact root-of-unity tables, offsets[t] locating the
#          table for coordinate t
# returns complex sums: out[b] = sum_p w[p] * prod_t roots_t[(beta_bt * v_pt) mod m_t]

def _char_sums_numpy(points, weights, betas, moduli, roots, offsets):
    out = np.empty(betas.shape[0], dtype=np.complex128)
    for b in range(betas.shape[0]):
        val = np.ones(points.shape[0], dtype=np.complex128)
        for t in range(points.shape[1]):
            idx = (betas[b, t] * points[:, t]) % moduli[t]
            val *= roots[offsets[t] + idx]
        out[b] = np.dot(weights, val)
    return out


if _use_numba:
    @njit(cache=True, parallel=True)
    def _char_sums_numba(points, weights, betas, moduli, roots, offsets):
        nb, nl = betas.shape
        npts = points.shape[0]
        out = np.empty(nb, dtype=np.complex128)
        for b in prange(nb):
            acc = 0.0 + 0.0j
            for p in range(npts):
                val = 1.0 + 0.0j
                for t in range(nl):
                    idx = (betas[b, t] * points[p, t]) % moduli[t]
                    val *= roots[offsets[t] + idx]
                acc += weights[p] * val
            out[b] = acc
        return out


def char_sums(points, weights, betas, moduli, roots, offsets):
    points = np.ascontiguousarray(points, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.int64)
    moduli = np.ascontiguousarray(moduli, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if _use_numba:
        return _char_sums_numba(points, weights, betas, moduli, roots, offsets)
    return _char_sums_numpy(points, weights, betas, moduli, roots, offsets)


# ---------------------------------------------------------------------------
# greedy selection scores
#
# Running real character sums C over all nontrivial characters (digits[j] =
# mixed-radix digits of character j). For each candidate row g with pair
# multiplier mult (2 for a {g,-g} pair, 1 for self-inverse g), the score is
# the conditional-expectation potential
#     sum_j (C[j] + mult * Re prod_t roots_t[(digits[j,t]*g[t]) mod m_t])^8;
# minimizing an even moment instead of the max norm avoids the massive ties
# the max produces on small groups.

def _greedy_scores_numpy(c, digits, cands, mults, moduli, roots, offsets):
    scores = np.empty(cands.shape[0], dtype=np.float64)
    for p in range(cands.shape[0]):
        val = np.ones(digits.shape[0], dtype=np.complex128)
        for t in range(digits.shape[1]):
            idx = (digits[:, t] * cands[p, t]) % moduli[t]
            val *= roots[offsets[t] + idx]
        v = c + mults[p] * val.real
        v2 = v * v
        v4 = v2 * v2
        scores[p] = float((v4 * v4).sum())
    return scores


if _use_numba:
    @njit(cache=True, parallel=True)
    def _greedy_scores_numba(c, digits, cands, mults, moduli, roots, offsets):
        np_, nl = cands.shape
        na = digits.shape[0]
        scores = np.empty(np_, dtype=np.float64)
        for p in prange(np_):
            acc = 0.0
            for j in range(na):
                val = 1.0 + 0.0j
                for t in range(nl):
                    idx = (digits[j, t] * cands[p, t]) % moduli[t]
                    val *= roots[offsets[t] + idx]
                v = c[j] + mults[p] * val.real
                v2 = v * v
                v4 = v2 * v2
                acc += v4 * v4
            scores[p] = acc
        return scores


def greedy_scores(c, digits, cands, mults, moduli, roots, offsets):
    c = np.ascontiguousarray(c, dtype=np.float64)
    digits = np.ascontiguousarray(digits, dtype=np.int64)
    cands = np.ascontiguousarray(cands, dtype=np.int64)
    mults = np.ascontiguousarray(mults, dtype=np.float64)
    moduli = np.ascontiguousarray(moduli, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if _use_numba:
        return _greedy_scores_numba(c, digits, cands, mults, moduli, roots,
                                    offsets)
    return _greedy_scores_numpy(c, digits, cands, mults, moduli, roots,
                                offsets)


# ---------------------------------------------------------------------------
# BFS over a Cayley graph given by action tables; returns distances from 0

def _bfs_numpy(tables):
    n = tables.shape[1]
    dist = np.full(n, -1, dtype=np.int64)
    dist[0] = 0
    frontier = np.array([0], dtype=np.int64)
    d = 0
    while frontier.size:
        nxt = np.unique(tables[:, frontier].ravel())
        nxt = nxt[dist[nxt] < 0]
        d += 1
        dist[nxt] = d
        frontier = nxt
    return dist


if _use_numba:
    @njit(cache=True)
    def _bfs_numba(tables):
        k, n = tables.shape
        dist = np.full(n, -1, dtype=np.int64)
        dist[0] = 0
        frontier = np.empty(n, dtype=np.int64)
        frontier[0] = 0
        fsize = 1
        d = 0
        while fsize:
            nxt = np.empty(n, dtype=np.int64)
            nsize = 0
            d += 1
            for fi in range(fsize):
                i = frontier[fi]
                for j in range(k):
                    b = tables[j, i]
                    if dist[b] < 0:
                        dist[b] = d
                        nxt[nsize] = b
                        nsize += 1
            frontier = nxt
            fsize = nsize
        return dist


def bfs_distances(tables):
    tables = np.ascontiguousarray(tables)
    if _use_numba:
        return _bfs_numba(tables)
    return _bfs_numpy(tables)
