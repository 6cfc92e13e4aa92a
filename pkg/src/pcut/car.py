"""Gaussian intrinsic autoregression view of the relaxation.

Y ~ N_{n,c-1}(0, sigma^2 K (x) I) with K = M^+, i.e. a density proportional
to exp(-tr(Y'MY) / (2 sigma^2)). The distribution is singular; samples live
in range(K) and no jitter is added.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pcut.graph import (
    AffinityGraph,
    KernelMatrix,
    LaplacianOperator,
    as_weights,
    laplacian_kernel,
    symmetrize,
)

__all__ = [
    "CarSpec",
    "SarSpec",
    "sigma_from_pi",
    "log_density",
    "conditional_moments",
    "sample_car",
    "sar_residuals",
    "spectrum_equivalence",
]


def sigma_from_pi(K, pi) -> float:
    """sigma^2 = 1 / tr(Pi K), which makes E(Y' Pi Y) = I."""
    K = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    pi = as_weights(pi, K.shape[0])
    t = float(pi @ np.diag(K))
    if not t > 0:
        raise ValueError(f"tr(Pi K) must be positive, got {t}")
    return 1.0 / t


@dataclass(frozen=True)
class CarSpec:
    Lop: LaplacianOperator
    sigma2: float
    width: int

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.width < 1:
            raise ValueError("embedding width must be at least 1")

    @classmethod
    def from_operator(cls, Lop: LaplacianOperator, pi, width: int) -> "CarSpec":
        return cls(Lop, sigma_from_pi(laplacian_kernel(Lop), pi), width)

    @property
    def kernel(self) -> np.ndarray:
        return laplacian_kernel(self.Lop).K


@dataclass(frozen=True)
class SarSpec:
    """Row-stochastic, zero-diagonal, nonnegative C for y_i = sum_j c_ij y_j + eps_i."""

    C: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ValueError("C must be square")
        if np.any(C < 0):
            raise ValueError("C must be nonnegative")
        if np.any(np.diag(C) != 0):
            raise ValueError("C must have a zero diagonal")
        if np.max(np.abs(C.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("C must be row-stochastic")
        object.__setattr__(self, "C", C)

    @classmethod
    def from_graph(cls, G: AffinityGraph) -> "SarSpec":
        """C = D^-1 W."""
        d = G.require_no_isolated()
        return cls(G.W / d[:, None])

    def precision(self) -> np.ndarray:
        R = np.eye(self.C.shape[0]) - self.C
        return symmetrize(R.T @ R)


def log_density(Y, spec: CarSpec) -> float:
    """-tr(Y'MY) / (2 sigma^2), the log density up to its normalizing constant."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != spec.Lop.n:
        raise ValueError("row count does not match the operator")
    return float(-np.sum(Y * (spec.Lop.M @ Y)) / (2.0 * spec.sigma2))


def conditional_moments(i: int, Y, G: AffinityGraph, spec: CarSpec, omega: float = 1.0):
    """Mean and isotropic variance scale of y_i given all other rows.

    mean = omega * sum_{j != i} w_ij y_j / l_ii and variance = sigma^2 / l_ii,
    with l_ii read from the operator. ``omega`` < 1 gives the proper CAR
    built on D - omega W.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    lii = spec.Lop.M[i, i]
    if not lii > 0:
        raise ValueError(f"node {i} is isolated (l_ii = {lii})")
    w = G.W[i].copy()
    w[i] = 0.0
    mean = omega * (w @ Y) / lii
    return mean, spec.sigma2 / lii


def _kernel_sqrt(K: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(symmetrize(K))
    tol = K.shape[0] * max(w.max(initial=0.0), 0.0) * 1e-12
    root = np.where(w > tol, np.sqrt(np.clip(w, 0.0, None)), 0.0)
    return (V * root) @ V.T


def sample_car(spec: CarSpec, count: int, rng) -> np.ndarray:
    """Draw ``count`` samples; returns an array of shape (count, n, width)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    root = _kernel_sqrt(spec.kernel)
    Z = rng.standard_normal((count, spec.Lop.n, spec.width))
    return np.sqrt(spec.sigma2) * np.einsum("ij,sjk->sik", root, Z)


def sar_residuals(Y, sar: SarSpec) -> np.ndarray:
    """eps = Y - C Y."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] != sar.C.shape[0]:
        raise ValueError("row count does not match C")
    return Y - sar.C @ Y


def spectrum_equivalence(G: AffinityGraph) -> float:
    """Largest gap between the sorted spectra of I - D^-1/2 W D^-1/2 and I - D^-1 W.

    The second spectrum comes from a general (nonsymmetric) eigensolver.
    """
    d = G.require_no_isolated()
    n = G.n
    s = 1.0 / np.sqrt(d)
    sym = np.linalg.eigvalsh(symmetrize(np.eye(n) - s[:, None] * G.W * s[None, :]))
    asym = np.linalg.eigvals(np.eye(n) - G.W / d[:, None])
    return float(np.max(np.abs(np.sort(sym) - np.sort(asym.real)), initial=0.0))
