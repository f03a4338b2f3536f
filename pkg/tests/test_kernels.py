"""Numeric kernels: jitted and numpy paths agree; env flag selects the path."""

import os
import subprocess
import sys

import numpy as np
import pytest

from groundmem import kernels

numba_missing = kernels.cosine_scores_numba is None


def random_inputs(seed, rows=257, dim=64):
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((rows, dim))
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    matrix = matrix / norms
    query = rng.standard_normal(dim)
    query /= np.linalg.norm(query)
    return matrix, query


def random_csr(seed, nodes=40):
    rng = np.random.default_rng(seed)
    neighbors = [[] for _ in range(nodes)]
    for _ in range(nodes * 2):
        a, b = rng.integers(0, nodes, 2)
        if a != b:
            neighbors[int(a)].append(int(b))
            neighbors[int(b)].append(int(a))
    indptr = np.zeros(nodes + 1, dtype=np.int64)
    flat = []
    for i, adj in enumerate(neighbors):
        indptr[i + 1] = indptr[i] + len(adj)
        flat.extend(adj)
    indices = np.asarray(flat, dtype=np.int64)
    teleport = np.zeros(nodes)
    teleport[rng.integers(0, nodes, 3)] = 1.0
    teleport /= teleport.sum()
    return indptr, indices, teleport


def test_cosine_numpy_matches_manual_dot():
    matrix, query = random_inputs(1)
    scores = kernels.cosine_scores_numpy(matrix, query)
    manual = np.array([float(np.dot(row, query)) for row in matrix])
    np.testing.assert_allclose(scores, manual, atol=1e-12)


def test_pagerank_numpy_scores_are_a_distribution():
    indptr, indices, teleport = random_csr(2)
    scores, iterations = kernels.pagerank_power_numpy(indptr, indices, teleport, 0.85, 1e-10, 200)
    assert iterations >= 1
    assert np.all(scores >= 0.0)
    assert abs(float(scores.sum()) - 1.0) < 1e-9


def test_pagerank_numpy_respects_max_iter():
    indptr, indices, teleport = random_csr(3)
    _, iterations = kernels.pagerank_power_numpy(indptr, indices, teleport, 0.85, 0.0, 7)
    assert iterations == 7


@pytest.mark.skipif(numba_missing, reason="numba unavailable")
def test_cosine_paths_agree():
    for seed in range(5):
        matrix, query = random_inputs(seed)
        np.testing.assert_allclose(
            kernels.cosine_scores_numba(matrix, query),
            kernels.cosine_scores_numpy(matrix, query),
            atol=1e-12,
        )


@pytest.mark.skipif(numba_missing, reason="numba unavailable")
def test_pagerank_paths_agree():
    for seed in range(5):
        indptr, indices, teleport = random_csr(seed)
        args = (indptr, indices, teleport, 0.85, 1e-10, 200)
        jit_scores, jit_iters = kernels.pagerank_power_numba(*args)
        np_scores, np_iters = kernels.pagerank_power_numpy(*args)
        assert jit_iters == np_iters
        np.testing.assert_allclose(jit_scores, np_scores, atol=1e-12)


def _selected_path(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("MEM_DISABLE_NUMBA", None)
    else:
        env["MEM_DISABLE_NUMBA"] = env_value
    code = (
        "from groundmem import kernels;"
        "print(kernels.USING_NUMBA and kernels.cosine_scores is kernels.cosine_scores_numba"
        " or not kernels.USING_NUMBA and kernels.cosine_scores is kernels.cosine_scores_numpy);"
        "print(kernels.USING_NUMBA)"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    wired_consistently, using = out.stdout.split()
    assert wired_consistently == "True"
    return using == "True"


def test_env_flag_selects_numpy_path():
    assert _selected_path("1") is False


@pytest.mark.skipif(numba_missing, reason="numba unavailable")
def test_default_uses_numba_when_available():
    assert _selected_path(None) is True
    assert _selected_path("0") is True
