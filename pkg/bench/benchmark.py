"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run: python bench/benchmark.py
The numba side is skipped when numba is unavailable or CAYEXP_BACKEND=numpy.
"""

import time

import numpy as np

from cayexp import _kernels as K
from cayexp.spectra import root_tables


def best_of(fn, *args, repeat=5):
    fn(*args)  # warmup (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    rng = np.random.default_rng(0)
    rows = []

    # cayley matvec: 200k vertices, 16 generators
    n, k = 200_000, 16
    tables = rng.integers(0, n, size=(k, n), dtype=np.int64)
    weights = np.full(k, 1.0 / k)
    x = rng.standard_normal(n)
    pair = [("cayley_matvec", K._matvec_numpy, (tables, weights, x))]

    # dense adjacency fill: 2000 vertices, 24 generators
    n2, k2 = 2000, 24
    tables2 = rng.integers(0, n2, size=(k2, n2), dtype=np.int64)
    weights2 = np.full(k2, 1.0 / k2)
    pair.append(("dense_adjacency", K._dense_fill_numpy,
                 (tables2, weights2, n2)))

    # direct character sums: 4096 points x 8192 characters over Z_2^12
    moduli = np.full(12, 2, dtype=np.int64)
    pts = rng.integers(0, 2, size=(4096, 12), dtype=np.int64)
    w = np.ones(4096)
    betas = rng.integers(0, 2, size=(8192, 12), dtype=np.int64)
    roots, offsets = root_tables(tuple(moduli))
    pair.append(("char_sums", K._char_sums_numpy,
                 (pts, w, betas, moduli, roots, offsets)))

    # greedy scores: 256 candidates x 4095 characters
    digits = np.indices(tuple(moduli)).reshape(12, -1).T[1:]
    digits = np.ascontiguousarray(digits, dtype=np.int64)
    c = rng.standard_normal(digits.shape[0])
    cands = rng.integers(0, 2, size=(256, 12), dtype=np.int64)
    mults = np.ones(256)
    pair.append(("greedy_scores", K._greedy_scores_numpy,
                 (c, digits, cands, mults, moduli, roots, offsets)))

    # bfs over a 200k-vertex Cayley graph
    pair.append(("bfs_distances", K._bfs_numpy, (tables,)))

    numba_fns = {}
    if K.BACKEND == "numba":
        numba_fns = {
            "cayley_matvec": K._matvec_numba,
            "dense_adjacency": K._dense_fill_numba,
            "char_sums": K._char_sums_numba,
            "greedy_scores": K._greedy_scores_numba,
            "bfs_distances": K._bfs_numba,
        }

    print(f"backend selected: {K.BACKEND}")
    print(f"{'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, np_fn, args in pair:
        t_np = best_of(np_fn, *args)
        if name in numba_fns:
            t_nb = best_of(numba_fns[name], *args)
            rows.append((name, t_np, t_nb))
            print(f"{name:<18} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<18} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>9}")
    return rows


if __name__ == "__main__":
    main()
