"""Shared generators and brute-force oracles for the test-suite."""
import itertools

import numpy as np

from pcut.graph import AffinityGraph


def random_graph(rng, n, density=1.0, zero_diagonal=True):
    W = rng.uniform(0.05, 1.0, size=(n, n))
    if density < 1.0:
        W *= rng.random((n, n)) < density
    W = np.triu(W, 1)
    W = W + W.T
    if not zero_diagonal:
        W[np.diag_indices(n)] = rng.uniform(0, 1, n)
    return AffinityGraph(W, zero_diagonal=zero_diagonal)


def random_connected_graph(rng, n, density=0.6):
    """Random weights on top of a spanning path, so the graph is connected."""
    W = np.triu(rng.uniform(0.05, 1.0, (n, n)) * (rng.random((n, n)) < density), 1)
    perm = rng.permutation(n)
    for a, b in zip(perm[:-1], perm[1:]):
        i, j = min(a, b), max(a, b)
        W[i, j] = max(W[i, j], rng.uniform(0.2, 1.0))
    return AffinityGraph(W + W.T, zero_diagonal=True)


def components_graph(sizes, rng=None):
    """Block-diagonal graph with dense connected blocks and no cross edges."""
    n = sum(sizes)
    W = np.zeros((n, n))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    start = 0
    for s in sizes:
        block = np.ones((s, s)) if rng is None else rng.uniform(0.3, 1.0, (s, s))
        block = np.triu(block, 1)
        W[start : start + s, start : start + s] = block + block.T
        start += s
    return AffinityGraph(W, zero_diagonal=True), labels


def random_labels(rng, n, c):
    """Uniform labels with every class present."""
    while True:
        lab = rng.integers(0, c, n)
        if np.unique(lab).size == c:
            return lab


def all_labelings(n, c):
    """Every labeling of n items with all c classes used, shape (m, n)."""
    grid = np.array(list(itertools.product(range(c), repeat=n)), dtype=np.int64)
    keep = np.all([np.any(grid == j, axis=1) for j in range(c)], axis=0)
    return grid[keep]


def brute_pcut(M, pi, labelings, c):
    """tr(E'ME (E' Pi E)^-1) for a stack of labelings, evaluated class by class."""
    total = np.zeros(labelings.shape[0])
    for j in range(c):
        mask = (labelings == j).astype(float)
        total += np.einsum("mi,ij,mj->m", mask, M, mask) / (mask @ pi)
    return total


def brute_T(K, pi, labelings, c, center=True):
    """Minimum-variance objective by explicit H_pi construction, stacked over labelings."""
    n = K.shape[0]
    s = pi.sum()
    H = np.eye(n) - np.outer(pi, np.ones(n)) / s
    A = H.T @ K @ H if center else K
    total = np.zeros(labelings.shape[0])
    for j in range(c):
        mask = (labelings == j) * pi
        total += np.einsum("mi,ij,mj->m", mask, A, mask) / mask.sum(axis=1)
    return total


def pair_rand_index(u, v):
    """Rand index by enumerating all pairs."""
    n = len(u)
    agree = 0
    for i in range(n):
        for j in range(i + 1, n):
            agree += (u[i] == u[j]) == (v[i] == v[j])
    return agree / (n * (n - 1) / 2)


def random_orthogonal(rng, k):
    q, r = np.linalg.qr(rng.normal(size=(k, k)))
    return q * np.sign(np.diag(r))


def planted_blobs(rng, per=30, sep=10.0, sigma=1.0):
    centers = sep * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    X = np.vstack([ctr + sigma * rng.normal(size=(per, 2)) for ctr in centers])
    return X, np.repeat(np.arange(3), per)
