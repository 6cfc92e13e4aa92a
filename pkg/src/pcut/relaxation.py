"""Penalized-cut objective and its spectral relaxations.

Both solvers work on the orthogonal complement of Pi^{1/2} 1, so the
centering constraint Y' Pi 1 = 0 holds exactly rather than by picking the
"right" eigenvector out of a possibly degenerate null space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from pcut.graph import (
    AffinityGraph,
    KernelMatrix,
    LaplacianOperator,
    MAX_NODES,
    as_weights,
    psd_pinv,
    symmetrize,
)
from pcut.partition import Partition, as_partition

__all__ = [
    "Embedding",
    "EigenSystem",
    "PsiMatrix",
    "pcut_graph",
    "pcut_matrix",
    "build_psi",
    "embed_partition",
    "solve_relaxation",
    "solve_minvar_relaxation",
    "solve_unconstrained_relaxation",
    "eigengap",
    "range_consistency",
    "principal_angles",
]


@dataclass(frozen=True)
class Embedding:
    """Relaxed n x (c-1) solution Y, with the weights it was solved under."""

    Y: np.ndarray
    pi: np.ndarray

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def c(self) -> int:
        return self.Y.shape[1] + 1

    @property
    def U(self) -> np.ndarray:
        """Pi^{1/2} Y, which has orthonormal columns."""
        return np.sqrt(self.pi)[:, None] * self.Y

    def constraint_residuals(self) -> tuple[float, float]:
        """Max-abs residuals of Y' Pi Y = I and Y' Pi 1 = 0."""
        PY = self.pi[:, None] * self.Y
        gram = self.Y.T @ PY - np.eye(self.Y.shape[1])
        return float(np.abs(gram).max(initial=0.0)), float(np.abs(PY.sum(axis=0)).max(initial=0.0))


@dataclass(frozen=True)
class EigenSystem:
    """Spectrum of the symmetrized operator.

    ``gammas[0]`` and ``mus[:, 0]`` belong to the constraint direction
    Pi^{1/2} 1 / ||Pi^{1/2} 1||; the rest is the spectrum on its orthogonal
    complement, ascending.  ``sense`` says whether the relaxation took the
    bottom (``min``) or top (``max``) end of that spectrum.
    """

    gammas: np.ndarray
    mus: np.ndarray
    sense: str = "min"


@dataclass(frozen=True)
class PsiMatrix:
    psi: np.ndarray
    class_weights: np.ndarray


def _class_terms(P: Partition, pi: np.ndarray):
    P.require_nonempty()
    eta = P.class_weights(pi)
    return P.indicator(), eta


def pcut_graph(P, G: AffinityGraph, pi) -> float:
    """sum_j [W(V_j, V) - W(V_j, V_j)] / sum_{i in V_j} pi_i, from the edge sums."""
    P = as_partition(P)
    pi = as_weights(pi, G.n)
    P.require_nonempty()
    total = 0.0
    d = G.degrees
    for j in range(P.c):
        idx = np.flatnonzero(P.labels == j)
        to_all = d[idx].sum()
        inside = G.W[np.ix_(idx, idx)].sum()
        total += (to_all - inside) / pi[idx].sum()
    return float(total)


def pcut_matrix(P, Lop, pi) -> float:
    """tr(E' M E (E' Pi E)^{-1}); M need only be symmetric."""
    M = Lop.M if isinstance(Lop, LaplacianOperator) else np.asarray(Lop, dtype=float)
    P = as_partition(P)
    pi = as_weights(pi, M.shape[0])
    E, eta = _class_terms(P, pi)
    return float(np.sum(np.diag(E.T @ M @ E) / eta))


def build_psi(class_weights) -> PsiMatrix:
    """Closed-form c x (c-1) matrix with Psi' diag(eta) Psi = I and Psi' eta = 0.

    Column l has zeros above row l, a positive entry on row l, and a
    common negative entry below it. Rows are simplex vertices with
    ||a_i - a_j||^2 = 1/eta_i + 1/eta_j.
    """
    eta = np.asarray(class_weights, dtype=float)
    c = eta.shape[0]
    if c < 2:
        raise ValueError("need at least two classes")
    if np.any(~np.isfinite(eta)) or np.any(eta <= 0):
        raise ValueError("class weights must be strictly positive")
    tail = np.cumsum(eta[::-1])[::-1]  # tail[l] = sum_{j >= l} eta_j
    psi = np.zeros((c, c - 1))
    for l in range(c - 1):
        rest = tail[l + 1]
        psi[l, l] = np.sqrt(rest / (eta[l] * tail[l]))
        psi[l + 1 :, l] = -np.sqrt(eta[l] / (tail[l] * rest))
    return PsiMatrix(psi, eta)


def embed_partition(P, psi: PsiMatrix, pi) -> Embedding:
    """Y = E Psi, piecewise constant on the classes of P."""
    P = as_partition(P)
    pi = as_weights(pi, P.n)
    if psi.psi.shape != (P.c, P.c - 1):
        raise ValueError(f"Psi has shape {psi.psi.shape}, expected {(P.c, P.c - 1)}")
    if not np.allclose(psi.class_weights, P.class_weights(pi), rtol=1e-12, atol=0):
        raise ValueError("Psi was built for different class weights")
    return Embedding(psi.psi[P.labels], pi)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def _complement_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis (n x n-1) of the complement of unit vector v.

    Columns 2..n of the Householder reflector mapping e_1 to v.
    """
    n = v.shape[0]
    w = v.copy()
    w[0] += 1.0 if v[0] >= 0 else -1.0
    H = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    return H[:, 1:]


def _check_c(c: int, n: int) -> None:
    if n > MAX_NODES:
        raise ValueError(f"n={n} exceeds the dense limit of {MAX_NODES}")
    if not 2 <= c <= n:
        raise ValueError(f"class count must satisfy 2 <= c <= n={n}, got {c}")


def _deflated_eigh(S: np.ndarray, sqrt_pi: np.ndarray):
    v0 = sqrt_pi / np.linalg.norm(sqrt_pi)
    B = _complement_basis(v0)
    w, V = np.linalg.eigh(symmetrize(B.T @ S @ B))
    mus = _fix_signs(B @ V)
    gammas = np.concatenate([[v0 @ S @ v0], w])
    return gammas, np.column_stack([v0, mus])


def solve_relaxation(Lop, pi, c: int) -> tuple[Embedding, EigenSystem]:
    """Minimize tr(Y' M Y) s.t. Y' Pi Y = I, Y' Pi 1 = 0.

    Returns Y = Pi^{-1/2} [mu_2 .. mu_c] with the rotation fixed to the
    identity; the attained objective is gamma_2 + ... + gamma_c.
    """
    M = Lop.M if isinstance(Lop, LaplacianOperator) else np.asarray(Lop, dtype=float)
    n = M.shape[0]
    _check_c(c, n)
    pi = as_weights(pi, n)
    if np.max(np.abs(M.sum(axis=1))) > 1e-8 * max(1.0, np.abs(M).max()):
        raise ValueError("operator does not annihilate the ones vector")
    r = np.sqrt(pi)
    S = M / r[:, None] / r[None, :]
    gammas, mus = _deflated_eigh(S, r)
    Y = mus[:, 1:c] / r[:, None]
    return Embedding(Y, pi), EigenSystem(gammas, mus, "min")


def _weighted_center(K: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """H_pi' K H_pi with H_pi = I - pi 1'/(pi'1)."""
    p = pi / pi.sum()
    Kp = K @ p
    return K - Kp[:, None] - Kp[None, :] + p @ Kp


def solve_minvar_relaxation(K, pi, c: int) -> tuple[Embedding, EigenSystem]:
    """Maximize tr(Y' Pi K Pi Y) s.t. Y' Pi Y = I, Y' Pi 1 = 0.

    Takes the top c-1 eigenvectors of Pi^{1/2} H_pi' K H_pi Pi^{1/2}.
    """
    K = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    n = K.shape[0]
    _check_c(c, n)
    pi = as_weights(pi, n)
    r = np.sqrt(pi)
    T = r[:, None] * _weighted_center(K, pi) * r[None, :]
    gammas, mus = _deflated_eigh(T, r)
    top = mus[:, 1:][:, ::-1][:, : c - 1]
    return Embedding(top / r[:, None], pi), EigenSystem(gammas, mus, "max")


def solve_unconstrained_relaxation(op, pi, c: int, sense: str = "min") -> np.ndarray:
    """n x c solution Z of the relaxation without the centering constraint.

    ``sense="min"``: bottom c eigenvectors of Pi^{-1/2} M Pi^{-1/2}, so that
    Z' Pi Z = I (with Pi = D this is min tr(Z'LZ) s.t. Z'DZ = I).
    ``sense="max"``: top c eigenvectors of Pi^{1/2} K Pi^{1/2}.
    """
    A = getattr(op, "M", getattr(op, "K", op))
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    _check_c(c, n)
    pi = as_weights(pi, n)
    r = np.sqrt(pi)
    if sense == "min":
        S = A / r[:, None] / r[None, :]
        _, V = np.linalg.eigh(symmetrize(S))
        V = V[:, :c]
    elif sense == "max":
        S = r[:, None] * A * r[None, :]
        _, V = np.linalg.eigh(symmetrize(S))
        V = V[:, ::-1][:, :c]
    else:
        raise ValueError(f"unknown sense {sense!r}")
    return _fix_signs(V) / r[:, None]


def eigengap(es: EigenSystem, c: int) -> float:
    """gamma_{c+1} - gamma_c for a minimization; for a maximization, the gap
    between the (c-1)th and cth largest eigenvalues off the constraint direction."""
    n = es.gammas.shape[0]
    if c + 1 > n:
        raise ValueError(f"eigengap needs c + 1 <= n ({c + 1} > {n})")
    if es.sense == "min":
        g = np.concatenate([es.gammas[:1], np.sort(es.gammas[1:])])
        return float(g[c] - g[c - 1])
    g = np.sort(es.gammas[1:])[::-1]
    return float(g[c - 2] - g[c - 1])


def range_consistency(Y, K) -> float:
    """||K K^+ Y - Y||_F / ||Y||_F: how far Y sits outside range(K)."""
    Y = Y.Y if isinstance(Y, Embedding) else np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    K = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    proj = K @ (psd_pinv(K) @ Y)
    return float(np.linalg.norm(proj - Y) / np.linalg.norm(Y))


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spaces of A and B."""
    return subspace_angles(np.asarray(A, float), np.asarray(B, float))
