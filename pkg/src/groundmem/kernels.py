"""Hot numeric kernels: cosine scoring and PageRank power iteration.

Each kernel ships in two builds — a numba @njit version and a pure-numpy
fallback. The numba build is used when numba imports cleanly and the
MEM_DISABLE_NUMBA environment variable is unset/empty; set
MEM_DISABLE_NUMBA=1 to force the numpy path. benchmarks/bench_kernels.py
compares the two.

Graph layout: undirected adjacency in CSR form (indptr, indices) with
both edge directions present, so W^T r reduces to a neighbor scan.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "cosine_scores",
    "pagerank_power",
    "cosine_scores_numpy",
    "pagerank_power_numpy",
    "cosine_scores_numba",
    "pagerank_power_numba",
]


def cosine_scores_numpy(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Dot products of L2-normalized rows against a normalized query."""
    return matrix @ query


def pagerank_power_numpy(
    indptr: np.ndarray,
    indices: np.ndarray,
    teleport: np.ndarray,
    damping: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int]:
    """Power iteration for r <- (1-d)p + d(W^T r + dangling_mass * p).

    W is the row-normalized undirected adjacency; rank leaving a
    dangling (degree-0) node is redistributed to the teleport vector.
    Stops when the L1 change drops below tol or after max_iter rounds.
    """
    n = teleport.shape[0]
    deg = np.diff(indptr).astype(np.float64)
    src = np.repeat(np.arange(n), np.diff(indptr))
    dst = indices
    dangling = deg == 0.0
    safe_deg = np.where(dangling, 1.0, deg)
    rank = teleport.copy()
    iterations = 0
    for iterations in range(1, max_iter + 1):
        weights = rank / safe_deg
        spread = np.bincount(dst, weights=weights[src], minlength=n)
        dangling_mass = float(rank[dangling].sum())
        new_rank = (1.0 - damping) * teleport + damping * (spread + dangling_mass * teleport)
        delta = float(np.abs(new_rank - rank).sum())
        rank = new_rank
        if delta < tol:
            break
    return rank, iterations


def _disabled_by_env() -> bool:
    return os.environ.get("MEM_DISABLE_NUMBA", "") not in ("", "0", "false")


cosine_scores_numba = None
pagerank_power_numba = None

try:
    from numba import njit

    @njit(cache=True)
    def _cosine_scores_jit(matrix, query):  # pragma: no cover - jit body
        n, d = matrix.shape
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += matrix[i, j] * query[j]
            out[i] = acc
        return out

    @njit(cache=True)
    def _pagerank_power_jit(indptr, indices, teleport, damping, tol, max_iter):  # pragma: no cover
        n = teleport.shape[0]
        rank = teleport.copy()
        new_rank = np.empty(n, dtype=np.float64)
        iterations = 0
        for it in range(1, max_iter + 1):
            iterations = it
            dangling_mass = 0.0
            for i in range(n):
                if indptr[i + 1] == indptr[i]:
                    dangling_mass += rank[i]
            for j in range(n):
                new_rank[j] = (1.0 - damping) * teleport[j] + damping * dangling_mass * teleport[j]
            for i in range(n):
                deg = indptr[i + 1] - indptr[i]
                if deg == 0:
                    continue
                share = damping * rank[i] / deg
                for k in range(indptr[i], indptr[i + 1]):
                    new_rank[indices[k]] += share
            delta = 0.0
            for j in range(n):
                delta += abs(new_rank[j] - rank[j])
                rank[j] = new_rank[j]
            if delta < tol:
                break
        return rank, iterations

    def cosine_scores_numba(matrix, query):
        return _cosine_scores_jit(
            np.ascontiguousarray(matrix, dtype=np.float64),
            np.ascontiguousarray(query, dtype=np.float64),
        )

    def pagerank_power_numba(indptr, indices, teleport, damping, tol, max_iter):
        return _pagerank_power_jit(
            indptr.astype(np.int64),
            indices.astype(np.int64),
            teleport.astype(np.float64),
            float(damping),
            float(tol),
            int(max_iter),
        )

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep but stays optional at runtime
    _HAVE_NUMBA = False


USING_NUMBA = _HAVE_NUMBA and not _disabled_by_env()

if USING_NUMBA:
    cosine_scores = cosine_scores_numba
    pagerank_power = pagerank_power_numba
else:
    cosine_scores = cosine_scores_numpy
    pagerank_power = pagerank_power_numpy
