"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Runs the cosine scan and the PageRank power iteration on synthetic inputs
through both code paths and prints a timing table. The jitted path is
warmed before timing so compilation is not billed to the measurement.

Usage: python benchmarks/bench_kernels.py [--rows 50000] [--dim 64] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from groundmem import kernels


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _random_csr(n: int, avg_degree: int, rng: np.random.Generator):
    counts = rng.poisson(avg_degree, n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = rng.integers(0, n, int(indptr[-1]), dtype=np.int64)
    return indptr, indices


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=50_000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--nodes", type=int, default=20_000)
    parser.add_argument("--degree", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    matrix = rng.standard_normal((args.rows, args.dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    query = rng.standard_normal(args.dim)
    query /= np.linalg.norm(query)

    indptr, indices = _random_csr(args.nodes, args.degree, rng)
    teleport = np.zeros(args.nodes)
    teleport[rng.integers(0, args.nodes, 5)] = 1.0
    teleport /= teleport.sum()

    rows = []
    cos_numpy = _time(lambda: kernels.cosine_scores_numpy(matrix, query), args.repeat)
    rows.append(("cosine scan", "numpy", cos_numpy, 1.0))
    pr_args = (indptr, indices, teleport, 0.85, 1e-8, 100)
    pr_numpy = _time(lambda: kernels.pagerank_power_numpy(*pr_args), args.repeat)
    rows.append(("pagerank power", "numpy", pr_numpy, 1.0))

    if kernels.cosine_scores_numba is not None:
        kernels.cosine_scores_numba(matrix, query)  # warm the jit
        cos_numba = _time(lambda: kernels.cosine_scores_numba(matrix, query), args.repeat)
        rows.insert(1, ("cosine scan", "numba", cos_numba, cos_numpy / cos_numba))
        kernels.pagerank_power_numba(*pr_args)
        pr_numba = _time(lambda: kernels.pagerank_power_numba(*pr_args), args.repeat)
        rows.append(("pagerank power", "numba", pr_numba, pr_numpy / pr_numba))

        np.testing.assert_allclose(
            kernels.cosine_scores_numpy(matrix, query),
            kernels.cosine_scores_numba(matrix, query),
            atol=1e-12,
        )
        np.testing.assert_allclose(
            kernels.pagerank_power_numpy(*pr_args)[0],
            kernels.pagerank_power_numba(*pr_args)[0],
            atol=1e-12,
        )
        print("numba and numpy paths agree to 1e-12\n")
    else:
        print("numba unavailable or disabled; numpy path only\n")

    print(f"{'kernel':<16} {'path':<7} {'best (ms)':>10} {'speedup':>8}")
    for kernel, path, seconds, speedup in rows:
        print(f"{kernel:<16} {path:<7} {seconds * 1e3:>10.2f} {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
