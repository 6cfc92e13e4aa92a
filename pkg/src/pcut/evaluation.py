"""Clustering metrics and the minimum-variance objectives."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from pcut.graph import KernelMatrix, as_weights
from pcut.partition import as_partition
from pcut.relaxation import _weighted_center

__all__ = [
    "MetricReport",
    "rand_index",
    "minvar_trace",
    "total_trace",
    "objective_T",
    "objective_Tprime",
]


@dataclass
class MetricReport:
    rand_index: float | None
    pcut_value: float
    minvar_trace: float
    eigengap: float
    iterations: int
    replicate_id: int
    seed: int

    def __post_init__(self):
        if self.rand_index is not None and not 0.0 <= self.rand_index <= 1.0:
            raise ValueError(f"rand index {self.rand_index} outside [0, 1]")
        for name in ("pcut_value", "minvar_trace", "eigengap"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")

    def to_dict(self) -> dict:
        return asdict(self)


def _pairs(x: np.ndarray) -> float:
    return float(np.sum(x * (x - 1)) / 2)


def rand_index(U, V) -> float:
    """Fraction of item pairs on which the two partitions agree.

    Uses contingency-table counts, so it is O(n + r s).
    """
    u = np.asarray(getattr(U, "labels", U))
    v = np.asarray(getattr(V, "labels", V))
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"partition sizes differ ({u.shape} vs {v.shape})")
    n = u.shape[0]
    if n < 2:
        raise ValueError("rand index needs at least two items")
    _, ui = np.unique(u, return_inverse=True)
    _, vi = np.unique(v, return_inverse=True)
    table = np.zeros((ui.max() + 1, vi.max() + 1))
    np.add.at(table, (ui, vi), 1)
    both = _pairs(table)
    same_u = _pairs(table.sum(axis=1))
    same_v = _pairs(table.sum(axis=0))
    total = n * (n - 1) / 2
    # a = both, b = total - same_u - same_v + both
    return (total + 2 * both - same_u - same_v) / total


def _as_kernel(K) -> np.ndarray:
    return K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)


def minvar_trace(K, P, pi) -> float:
    """Weighted within-class scatter trace in the feature space of K.

    (1 / sum pi) sum_j sum_{i in V_j} pi_i ||x_i - m_j||^2, where
    ||x_i - m_j||^2 = K_ii - 2 sum_l p_l K_il + sum_{l,m} p_l p_m K_lm
    with p the within-class normalized weights.
    """
    K = _as_kernel(K)
    P = as_partition(P)
    pi = as_weights(pi, K.shape[0])
    P.require_nonempty()
    total = 0.0
    for j in range(P.c):
        idx = np.flatnonzero(P.labels == j)
        w = pi[idx]
        p = w / w.sum()
        Kj = K[np.ix_(idx, idx)]
        dist = np.diag(Kj) - 2.0 * Kj @ p + p @ Kj @ p
        total += w @ dist
    return float(total / pi.sum())


def total_trace(K, pi) -> float:
    """Weighted total scatter trace, the one-class value of ``minvar_trace``."""
    K = _as_kernel(K)
    pi = as_weights(pi, K.shape[0])
    return float(pi @ np.diag(_weighted_center(K, pi)) / pi.sum())


def objective_T(P, K, pi) -> float:
    """tr(E' Pi H_pi' K H_pi Pi E (E' Pi E)^{-1}); larger means tighter classes."""
    K = _as_kernel(K)
    P = as_partition(P)
    pi = as_weights(pi, K.shape[0])
    P.require_nonempty()
    PE = pi[:, None] * P.indicator()
    A = PE.T @ _weighted_center(K, pi) @ PE
    return float(np.sum(np.diag(A) / P.class_weights(pi)))


def objective_Tprime(P, K, pi) -> float:
    """tr(E' Pi K Pi E (E' Pi E)^{-1}), which exceeds T by pi'K pi / pi'1."""
    K = _as_kernel(K)
    P = as_partition(P)
    pi = as_weights(pi, K.shape[0])
    P.require_nonempty()
    PE = pi[:, None] * P.indicator()
    A = PE.T @ K @ PE
    return float(np.sum(np.diag(A) / P.class_weights(pi)))
