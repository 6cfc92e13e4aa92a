"""Data ingestion and the matrices built from it.

Everything here is dense; the intended scale is a few thousand points.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pcut.partition import Partition

__all__ = [
    "AffinityGraph",
    "LaplacianOperator",
    "KernelMatrix",
    "as_weights",
    "load_dataset",
    "standardize",
    "build_affinity",
    "laplacian",
    "sar_laplacian",
    "centered_kernel",
    "laplacian_kernel",
    "psd_pinv",
    "feature_distances",
    "centering_matrix",
]

MAX_NODES = 5000


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def centering_matrix(n: int) -> np.ndarray:
    """H_n = I - 11'/n."""
    return np.eye(n) - np.full((n, n), 1.0 / n)


def as_weights(pi, n: int | None = None) -> np.ndarray:
    """Validate a vector of strictly positive node weights."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1:
        raise ValueError("weights must be a 1-D vector")
    if n is not None and pi.shape[0] != n:
        raise ValueError(f"expected {n} weights, got {pi.shape[0]}")
    if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
        raise ValueError("weights must be finite and strictly positive")
    return pi


@dataclass(frozen=True)
class AffinityGraph:
    W: np.ndarray
    zero_diagonal: bool = False

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("affinity matrix must be square")
        if W.shape[0] > MAX_NODES:
            raise ValueError(f"n={W.shape[0]} exceeds the dense limit of {MAX_NODES}")
        if not np.all(np.isfinite(W)):
            raise ValueError("affinity matrix has non-finite entries")
        if np.any(W < 0):
            raise ValueError("affinity matrix has negative entries")
        if np.max(np.abs(W - W.T), initial=0.0) > 1e-12:
            raise ValueError("affinity matrix is not symmetric")
        if self.zero_diagonal and np.any(np.diag(W) != 0):
            raise ValueError("zero_diagonal set but W has a nonzero diagonal")
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.W.sum(axis=1)

    def require_no_isolated(self) -> np.ndarray:
        d = self.degrees
        bad = np.flatnonzero(d <= 0)
        if bad.size:
            raise ValueError(f"isolated vertex at index {bad[0]} (degree 0)")
        return d


@dataclass(frozen=True)
class LaplacianOperator:
    """A symmetric PSD matrix with M 1 = 0; ``kind`` is ``plain`` or ``sar``."""

    M: np.ndarray
    kind: str = "plain"

    def __post_init__(self):
        if self.kind not in ("plain", "sar"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("operator must be square")
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True)
class KernelMatrix:
    K: np.ndarray
    centered: bool = False

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("kernel matrix must be square")
        object.__setattr__(self, "K", K)

    @property
    def n(self) -> int:
        return self.K.shape[0]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_dataset(path, label_column: int | None = None):
    """Read a comma-separated numeric table.

    A first line that does not parse as numbers is treated as a header.
    Labels (any strings) are mapped to dense 0-based ids in order of
    first appearance.

    Returns
    -------
    X : (n, d) ndarray
    truth : Partition or None
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset: {path}")
    with path.open(newline="") as fh:
        rows = [[c.strip() for c in r] for r in csv.reader(fh) if any(c.strip() for c in r)]

    if rows:
        first = rows[0]
        feature_cells = [c for j, c in enumerate(first) if j != label_column]
        if not all(_is_number(c) for c in feature_cells):
            rows = rows[1:]
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than 2 rows")

    width = len(rows[0])
    if label_column is not None and not 0 <= label_column < width:
        raise ValueError(f"label column {label_column} out of range for {width} columns")

    features, labels = [], []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"{path}: ragged row {lineno} ({len(row)} cells, expected {width})")
        vals = []
        for j, cell in enumerate(row):
            if j == label_column:
                labels.append(cell)
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise ValueError(f"{path}: non-numeric feature {cell!r} in row {lineno}") from None
        features.append(vals)

    X = np.array(features, dtype=float)
    if X.shape[1] < 1:
        raise ValueError(f"{path}: no feature columns")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{path}: non-finite feature value")

    truth = None
    if label_column is not None:
        ids: dict[str, int] = {}
        dense = [ids.setdefault(lab, len(ids)) for lab in labels]
        truth = Partition(np.array(dense), len(ids))
    return X, truth


def standardize(X) -> np.ndarray:
    """Zero mean, unit sample standard deviation per column.

    Constant columns map to zeros.
    """
    X = np.asarray(X, dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    out = X - mu
    const = sd <= 1e-12 * np.maximum(1.0, np.abs(mu))
    out[:, const] = 0.0
    out[:, ~const] /= sd[~const]
    return out


def build_affinity(X, beta: float, zero_diagonal: bool = False) -> AffinityGraph:
    """Gaussian affinities w_ij = exp(-||x_i - x_j||^2 / beta)."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if not np.all(np.isfinite(X)):
        raise ValueError("data matrix has non-finite entries")
    sq = np.sum(X**2, axis=1)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.maximum(dist2, 0.0, out=dist2)
    W = symmetrize(np.exp(-dist2 / beta))
    np.fill_diagonal(W, 0.0 if zero_diagonal else 1.0)
    return AffinityGraph(W, zero_diagonal=zero_diagonal)


def laplacian(G: AffinityGraph) -> LaplacianOperator:
    """L = D - W."""
    M = np.diag(G.degrees) - G.W
    return LaplacianOperator(symmetrize(M), kind="plain")


def sar_laplacian(G: AffinityGraph) -> LaplacianOperator:
    """(I - D^-1 W)'(I - D^-1 W), the precision of the SAR model with C = D^-1 W."""
    d = G.require_no_isolated()
    R = np.eye(G.n) - G.W / d[:, None]
    return LaplacianOperator(symmetrize(R.T @ R), kind="sar")


def centered_kernel(G: AffinityGraph, variant: str = "plain") -> KernelMatrix:
    """H W H, or H (I + W) H for the zero-diagonal graphs used with margin rounding."""
    if variant == "plain":
        A = G.W
    elif variant == "plus_identity":
        if np.any(np.diag(G.W) != 0):
            raise ValueError("plus_identity kernel needs a zero-diagonal affinity")
        A = G.W + np.eye(G.n)
    else:
        raise ValueError(f"unknown kernel variant {variant!r}")
    # H A H without forming H
    A = A - A.mean(axis=0, keepdims=True)
    A = A - A.mean(axis=1, keepdims=True)
    return KernelMatrix(symmetrize(A), centered=True)


def psd_pinv(M: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric PSD matrix.

    Eigenvalues at or below ``n * max_eig * rtol`` are treated as zero.
    """
    M = symmetrize(np.asarray(M, dtype=float))
    w, V = np.linalg.eigh(M)
    top = max(w.max(initial=0.0), 0.0)
    keep = w > M.shape[0] * top * rtol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return symmetrize((V * inv) @ V.T)


def laplacian_kernel(Lop: LaplacianOperator) -> KernelMatrix:
    """K = M^+; centered whenever M annihilates the ones vector."""
    K = psd_pinv(Lop.M)
    centered = bool(np.max(np.abs(Lop.M.sum(axis=1)), initial=0.0) <= 1e-10 * max(1.0, np.abs(Lop.M).max()))
    return KernelMatrix(K, centered=centered)


def feature_distances(K) -> np.ndarray:
    """Squared feature-space distances K_ii + K_jj - 2 K_ij."""
    K = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    k = np.diag(K)
    D = k[:, None] + k[None, :] - 2.0 * K
    D = symmetrize(D)
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)
