"""Turning a relaxed embedding back into a hard partition.

Three rounders share one result type:

* ``procrustean_rounding`` alternates an SVD rotation toward the class
  targets E G with margin-based reassignment.
* ``weighted_kmeans_rounding`` is K-means with pi-weighted centers.
* ``yu_shi_rounding`` rotates row-normalized c-column solutions onto E.

Ties in every argmax/argmin go to the lowest index (numpy's default).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from pcut.partition import Partition, as_partition
from pcut.relaxation import Embedding

log = logging.getLogger(__name__)

__all__ = [
    "RoundingError",
    "RoundingResult",
    "g_matrix",
    "procrustes_align",
    "assign_by_margin",
    "initialize",
    "procrustean_rounding",
    "weighted_kmeans_rounding",
    "yu_shi_rounding",
    "normalize_rows",
    "surrogate_loss",
    "empirical_risk",
    "fisher_consistent_margins",
]

INIT_STRATEGIES = ("orthogonal", "identity", "random")
DESCENT_TOL = 1e-10


class RoundingError(RuntimeError):
    pass


@dataclass
class RoundingResult:
    partition: Partition
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    rotation: np.ndarray | None = None
    centers: np.ndarray | None = None


def g_matrix(c: int) -> np.ndarray:
    """G = [I_{c-1} - 11'/c, -1/c]' (c x (c-1)); row j is the target for class j."""
    if c < 2:
        raise ValueError("need at least two classes")
    return np.vstack([np.eye(c - 1) - 1.0 / c, np.full((1, c - 1), -1.0 / c)])


def procrustes_align(U: np.ndarray, P) -> np.ndarray:
    """Orthogonal Q minimizing ||E G - U Q||_F, i.e. maximizing tr(Q' U' E G).

    With U' E G = Theta Lambda V', Q = Theta V'.
    """
    U = np.asarray(U, dtype=float)
    P = as_partition(P, U.shape[1] + 1)
    if P.c != U.shape[1] + 1:
        raise ValueError(f"partition has {P.c} classes but U has {U.shape[1]} columns")
    if np.count_nonzero(P.sizes()) < 2:
        raise ValueError("Procrustes alignment needs at least two occupied classes")
    EG = g_matrix(P.c)[P.labels]
    theta, _, vt = np.linalg.svd(U.T @ EG)
    return theta @ vt


def _procrustes_loss(U, Q, P: Partition) -> float:
    return float(np.sum((g_matrix(P.c)[P.labels] - U @ Q) ** 2))


def assign_by_margin(Y: np.ndarray) -> Partition:
    """Class argmax_j y_ij when that entry is positive, else the last class."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    c = Y.shape[1] + 1
    best = np.argmax(Y, axis=1)
    labels = np.where(Y[np.arange(Y.shape[0]), best] > 0, best, c - 1)
    return Partition(labels, c)


def _margins(Y: np.ndarray) -> np.ndarray:
    # distance of each row from switching class under the margin rule
    top = Y.max(axis=1)
    if Y.shape[1] == 1:
        return np.abs(top)
    part = np.partition(Y, -2, axis=1)
    runner = np.where(top > 0, np.maximum(part[:, -2], 0.0), 0.0)
    return np.abs(top - runner)


def _repair(labels: np.ndarray, c: int, badness: np.ndarray) -> np.ndarray:
    """Fill each empty class with the worst-fitting point of a class that can spare one."""
    labels = labels.copy()
    for j in range(c):
        sizes = np.bincount(labels, minlength=c)
        if sizes[j]:
            continue
        donors = sizes[labels] > 1
        if not donors.any():
            raise RoundingError(f"cannot repair empty class {j}: no class has a spare point")
        cand = np.flatnonzero(donors)
        i = cand[np.argmax(badness[cand])]
        log.debug("moving point %d into empty class %d", i, j)
        labels[i] = j
        badness = badness.copy()
        badness[i] = -np.inf
    return labels


def normalize_rows(Z: np.ndarray) -> np.ndarray:
    """dg(Z Z')^{-1/2} Z; zero rows stay zero."""
    Z = np.asarray(Z, dtype=float)
    norms = np.linalg.norm(Z, axis=1)
    zero = norms == 0
    if zero.any():
        log.warning("%d zero-norm rows left unnormalized", int(zero.sum()))
    out = np.zeros_like(Z)
    out[~zero] = Z[~zero] / norms[~zero, None]
    return out


def _cosines(X: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    Xn = X / safe[:, None]
    return Xn @ Xn[seeds].T


def _orthogonal_seeds(X: np.ndarray, c: int, rng=None) -> list[int]:
    # furthest-first in angle: each new seed minimizes its largest cosine to the seeds so far
    if rng is None:
        first = int(np.argmax(np.linalg.norm(X, axis=1)))
    else:
        first = int(rng.integers(X.shape[0]))
    seeds = [first]
    worst = _cosines(X, np.array(seeds))[:, 0]
    for _ in range(c - 1):
        cand = worst.copy()
        cand[seeds] = np.inf
        nxt = int(np.argmin(cand))
        seeds.append(nxt)
        worst = np.maximum(worst, _cosines(X, np.array([nxt]))[:, 0])
    return seeds


def initialize(X: np.ndarray, c: int, strategy: str = "orthogonal", rng=None) -> Partition:
    """Initial partition for the rounders.

    ``X`` is either an (n, c-1) embedding or an (n, c) row-normalized
    matrix; ``identity`` means "no rotation", i.e. margin assignment of the
    former and plain argmax of the latter.

    ``orthogonal`` is a furthest-first stand-in for the usual "orthogonal
    initialization": seeds are chosen so each new row has the smallest
    maximal cosine to the seeds already picked, then every row joins its
    highest-cosine seed. The first seed is the largest-norm row, or a
    uniformly random row when ``rng`` is given.
    """
    X = np.asarray(X, dtype=float)
    n, width = X.shape
    if width not in (c - 1, c):
        raise ValueError(f"matrix width {width} does not fit c={c}")
    if strategy == "identity":
        if width == c - 1:
            labels = _repair(assign_by_margin(X).labels, c, -_margins(X))
        else:
            labels = np.argmax(X, axis=1)
            labels = _repair(labels, c, -X[np.arange(n), labels])
    elif strategy == "orthogonal":
        if n < c:
            raise ValueError(f"need at least c={c} rows")
        seeds = _orthogonal_seeds(X, c, rng)
        labels = np.argmax(_cosines(X, np.array(seeds)), axis=1)
        labels[seeds] = np.arange(c)
    elif strategy == "random":
        if rng is None:
            raise ValueError("random initialization needs an rng")
        labels = rng.integers(0, c, size=n)
        labels = _repair(labels, c, rng.random(n))
    else:
        raise ValueError(f"unknown init strategy {strategy!r}")
    return Partition(labels, c)


def _start(X, c, init, rng) -> Partition:
    return init if isinstance(init, Partition) else initialize(X, c, init, rng)


def procrustean_rounding(
    emb: Embedding,
    c: int | None = None,
    init="orthogonal",
    max_iter: int = 100,
    rng=None,
    safeguard: bool = True,
) -> RoundingResult:
    """Alternate Procrustes rotation and margin reassignment.

    The recorded objective is ||E G - U Q||_F^2 with U = Pi^{1/2} Y. The
    margin step does not minimize that quantity for fixed Q (it is not
    indifferent to class sizes), so with ``safeguard`` the iteration stops
    at the last partition whose objective did not go up.
    """
    c = emb.c if c is None else c
    if c != emb.c:
        raise ValueError(f"embedding has width {emb.Y.shape[1]}, incompatible with c={c}")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    U = emb.U
    scale = 1.0 / np.sqrt(emb.pi)
    P = _start(emb.Y, c, init, rng)

    trace: list[float] = []
    Q = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Q_new = procrustes_align(U, P)
        obj = _procrustes_loss(U, Q_new, P)
        if safeguard and trace and obj > trace[-1] + DESCENT_TOL:
            P = prev
            converged = True
            it -= 1
            break
        Q = Q_new
        trace.append(obj)
        Y = scale[:, None] * (U @ Q)
        new = assign_by_margin(Y).labels
        new = _repair(new, c, -_margins(Y))
        if np.array_equal(new, P.labels):
            converged = True
            break
        prev, P = P, Partition(new, c)
    return RoundingResult(P, trace, it, converged, rotation=Q)


def _weighted_centers(Y, labels, pi, c):
    w = np.bincount(labels, weights=pi, minlength=c)
    sums = np.zeros((c, Y.shape[1]))
    np.add.at(sums, labels, pi[:, None] * Y)
    return sums / w[:, None]


def weighted_kmeans_rounding(
    emb: Embedding,
    c: int | None = None,
    init="orthogonal",
    max_iter: int = 100,
    rng=None,
) -> RoundingResult:
    """K-means on the rows of Y with centers m_j = sum pi_i y_i / sum pi_i.

    The trace holds sum_i pi_i ||y_i - m_{t_i}||^2, which both steps
    decrease; with pi = 1 it is the ordinary K-means distortion.
    """
    c = emb.c if c is None else c
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    Y, pi = emb.Y, emb.pi
    labels = _start(Y, c, init, rng).labels.copy()

    trace: list[float] = []
    converged = False
    it = 0
    centers = None
    for it in range(1, max_iter + 1):
        centers = _weighted_centers(Y, labels, pi, c)
        dist = np.sum((Y[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        trace.append(float(np.sum(pi * dist[np.arange(len(labels)), labels])))
        new = np.argmin(dist, axis=1)
        new = _repair(new, c, dist[np.arange(len(new)), new])
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
    return RoundingResult(Partition(labels, c), trace, it, converged, centers=centers)


def yu_shi_rounding(
    Z: np.ndarray,
    init="orthogonal",
    max_iter: int = 100,
    rng=None,
) -> RoundingResult:
    """Rotate the row-normalized Z toward a partition indicator E.

    Alternates R = argmin ||E - Z_hat R|| over orthogonal R (an SVD) and
    t_i = argmax_j (Z_hat R)_ij. The trace holds ||E - Z_hat R||_F^2.
    """
    Z = np.asarray(Z, dtype=float)
    n, c = Z.shape
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    Zh = normalize_rows(Z)
    zero_rows = np.linalg.norm(Zh, axis=1) == 0
    P = _start(Zh, c, init, rng)
    labels = P.labels.copy()
    labels[zero_rows] = c - 1

    trace: list[float] = []
    converged = False
    R = np.eye(c)
    it = 0
    for it in range(1, max_iter + 1):
        E = Partition(labels, c).indicator()
        a, _, bt = np.linalg.svd(Zh.T @ E)
        R = a @ bt
        ZR = Zh @ R
        trace.append(float(np.sum((E - ZR) ** 2)))
        new = np.argmax(ZR, axis=1)
        new[zero_rows] = c - 1
        new = _repair(new, c, -ZR[np.arange(n), new])
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
    return RoundingResult(Partition(labels, c), trace, it, converged, rotation=R)


def surrogate_loss(y, j: int) -> float:
    """Exponential multiclass loss sum_{l != j} exp(y_l - y_j), with y padded by y_c = 0.

    ``j`` is a 0-based class index in 0..c-1.
    """
    y = np.append(np.asarray(y, dtype=float), 0.0)
    if not 0 <= j < y.size:
        raise ValueError(f"class {j} out of range for c={y.size}")
    d = np.exp(y - y[j])
    return float(d.sum() - 1.0)


def empirical_risk(Y: np.ndarray, labels) -> float:
    """Mean surrogate loss of the rows of Y under the given labels."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    P = as_partition(labels, Y.shape[1] + 1)
    if P.c != Y.shape[1] + 1 or P.n != Y.shape[0]:
        raise ValueError("labels do not match the embedding shape")
    full = np.hstack([Y, np.zeros((Y.shape[0], 1))])
    own = full[np.arange(P.n), P.labels]
    return float(np.mean(np.exp(full - own[:, None]).sum(axis=1) - 1.0))


def fisher_consistent_margins(P) -> np.ndarray:
    """Population minimizer y_j = log(P_j / P_c) / 2 of the expected exponential loss."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 1 or P.size < 2:
        raise ValueError("need a probability vector with at least two classes")
    if np.any(P <= 0):
        raise ValueError("class probabilities must be strictly positive")
    if abs(P.sum() - 1.0) > 1e-8:
        raise ValueError("class probabilities must sum to 1")
    return 0.5 * np.log(P[:-1] / P[-1])
