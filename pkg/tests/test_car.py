import numpy as np
import pytest

from helpers import random_connected_graph
from pcut.car import (
    CarSpec,
    SarSpec,
    conditional_moments,
    log_density,
    sample_car,
    sar_residuals,
    sigma_from_pi,
    spectrum_equivalence,
)
from pcut.graph import AffinityGraph, laplacian, laplacian_kernel, sar_laplacian
from pcut.relaxation import solve_relaxation

PATH3 = AffinityGraph(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], float), zero_diagonal=True)


def _path(n):
    W = np.zeros((n, n))
    i = np.arange(n - 1)
    W[i, i + 1] = W[i + 1, i] = 1.0
    return AffinityGraph(W, zero_diagonal=True)


def _precision_conditional_mean(Qm, i, Y):
    """-Q_AA^{-1} Q_AB y_B for A = {i}."""
    rest = np.delete(np.arange(Qm.shape[0]), i)
    return -np.linalg.solve(Qm[[i]][:, [i]], Qm[[i]][:, rest] @ Y[rest])[0]


def test_sigma_from_pi():
    K = np.diag([1.0, 1.0, 2.0])
    assert sigma_from_pi(K, np.ones(3)) == pytest.approx(0.25)
    assert sigma_from_pi(3 * K, np.ones(3)) == pytest.approx(0.25 / 3)
    with pytest.raises(ValueError):
        sigma_from_pi(np.zeros((2, 2)), np.ones(2))


def test_spec_validation():
    with pytest.raises(ValueError):
        CarSpec(laplacian(PATH3), 0.0, 1)
    with pytest.raises(ValueError):
        SarSpec(np.array([[0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        SarSpec(np.array([[0.0, 0.9], [1.0, 0.0]]))


def test_log_density(rng):
    spec = CarSpec.from_operator(laplacian(PATH3), np.ones(3), 2)
    assert log_density(np.ones((3, 2)), spec) == pytest.approx(0.0, abs=1e-14)
    Y1, Y2 = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    M = spec.Lop.M
    diff = -(np.trace(Y1.T @ M @ Y1) - np.trace(Y2.T @ M @ Y2)) / (2 * spec.sigma2)
    assert log_density(Y1, spec) - log_density(Y2, spec) == pytest.approx(diff)
    with pytest.raises(ValueError):
        log_density(np.ones((4, 2)), spec)


def test_relaxation_maximizes_log_density(rng):
    n, c = 10, 3
    G = random_connected_graph(rng, n)
    pi = G.degrees
    Lop = laplacian(G)
    spec = CarSpec.from_operator(Lop, pi, c - 1)
    emb, _ = solve_relaxation(Lop, pi, c)
    best = log_density(emb.Y, spec)
    r = np.sqrt(pi)
    for _ in range(200):
        # random Y with Y'PiY = I and Y'Pi1 = 0
        A = r[:, None] * rng.normal(size=(n, c - 1))
        A -= np.outer(r, r @ A) / pi.sum()
        U, _ = np.linalg.qr(A)
        assert log_density(U / r[:, None], spec) <= best + 1e-8


def test_conditional_moments_examples():
    spec = CarSpec.from_operator(laplacian(PATH3), np.ones(3), 2)
    Y = np.array([[1.0, 2.0], [7.0, 7.0], [3.0, -2.0]])
    mean, var = conditional_moments(1, Y, PATH3, spec)
    np.testing.assert_allclose(mean, [2.0, 0.0])
    assert var == pytest.approx(spec.sigma2 / 2)
    mean, _ = conditional_moments(0, Y, PATH3, spec)
    np.testing.assert_allclose(mean, Y[1])


def test_conditional_moments_isolated():
    G = AffinityGraph(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0.0]]), zero_diagonal=True)
    spec = CarSpec(laplacian(G), 1.0, 1)
    with pytest.raises(ValueError, match="isolated"):
        conditional_moments(2, np.zeros((3, 1)), G, spec)


def test_conditional_matches_precision_oracle(rng):
    for _ in range(20):
        n = int(rng.integers(3, 9))
        G = random_connected_graph(rng, n)
        Lop = laplacian(G)
        spec = CarSpec.from_operator(Lop, np.ones(n), 2)
        Y = rng.normal(size=(n, 2))
        Qm = Lop.M / spec.sigma2
        for i in range(n):
            mean, var = conditional_moments(i, Y, G, spec)
            np.testing.assert_allclose(mean, _precision_conditional_mean(Qm, i, Y), atol=1e-8)
            assert var == pytest.approx(1.0 / Qm[i, i], rel=1e-12)


def test_omega_car_conditional(rng):
    n, omega = 7, 0.6
    G = random_connected_graph(rng, n)
    spec = CarSpec.from_operator(laplacian(G), np.ones(n), 1)
    Qm = np.diag(G.degrees) - omega * G.W  # proper CAR precision
    Y = rng.normal(size=(n, 1))
    for i in range(n):
        mean, _ = conditional_moments(i, Y, G, spec, omega=omega)
        np.testing.assert_allclose(mean, _precision_conditional_mean(Qm, i, Y), atol=1e-10)


def test_samples_live_in_range(rng):
    spec = CarSpec.from_operator(laplacian(random_connected_graph(rng, 8)), np.ones(8), 3)
    S = sample_car(spec, 50, rng)
    assert S.shape == (50, 8, 3)
    assert np.abs(S.sum(axis=1)).max() <= 1e-8
    with pytest.raises(ValueError):
        sample_car(spec, 0, rng)


def test_sampler_reproducible():
    spec = CarSpec.from_operator(laplacian(PATH3), np.ones(3), 2)
    a = sample_car(spec, 5, np.random.default_rng(9))
    b = sample_car(spec, 5, np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)


def test_sigma_normalizes_second_moment(rng):
    G = random_connected_graph(rng, 6)
    pi = G.degrees
    spec = CarSpec.from_operator(laplacian(G), pi, 2)
    S = sample_car(spec, 20000, rng)
    second = np.einsum("sik,i,sil->kl", S, pi, S) / S.shape[0]
    assert np.linalg.norm(second - np.eye(2)) / np.sqrt(2) <= 0.05


def test_markov_property():
    n = 6
    G = _path(n)
    spec = CarSpec.from_operator(laplacian(G), np.ones(n), 1)
    S = sample_car(spec, 20000, np.random.default_rng(11))[:, :, 0]
    P = np.linalg.pinv(np.cov(S, rowvar=False), rcond=1e-10)
    rho = -P / np.sqrt(np.outer(np.diag(P), np.diag(P)))
    for i in range(n):
        for j in range(i + 2, n):
            assert abs(rho[i, j]) <= 0.05
    # neighbors remain strongly dependent
    assert min(abs(rho[i, i + 1]) for i in range(n - 1)) > 0.3
    # conditional-mean weights w_ij / l_ii read off the empirical precision
    L = laplacian(G).M
    coef = -P / np.diag(P)[:, None]
    expect = G.W / np.diag(L)[:, None]
    assert np.abs(coef - np.diag(np.diag(coef)) - expect).max() <= 0.05


def test_sar_residuals(rng):
    G = random_connected_graph(rng, 9)
    sar = SarSpec.from_graph(G)
    assert np.abs(sar_residuals(np.ones((9, 2)) * [3.0, -1.0], sar)).max() <= 1e-12
    Y = rng.normal(size=(9, 2))
    eps = Y - sar.C @ Y
    np.testing.assert_allclose(sar_residuals(Y, sar), eps, atol=1e-12)
    np.testing.assert_allclose(sar.precision(), sar_laplacian(G).M, atol=1e-10)
    with pytest.raises(ValueError):
        sar_residuals(np.ones((4, 1)), sar)


def test_spectrum_small_graphs():
    two = AffinityGraph(np.array([[0.0, 1.0], [1.0, 0.0]]), zero_diagonal=True)
    k3 = AffinityGraph(np.ones((3, 3)) - np.eye(3), zero_diagonal=True)
    for G, spec in ((two, [0, 2]), (k3, [0, 1.5, 1.5])):
        d = G.degrees
        asym = np.sort(np.linalg.eigvals(np.eye(G.n) - G.W / d[:, None]).real)
        np.testing.assert_allclose(asym, spec, atol=1e-12)
        assert spectrum_equivalence(G) <= 1e-12


def test_spectrum_random(rng):
    for _ in range(20):
        assert spectrum_equivalence(random_connected_graph(rng, int(rng.integers(3, 16)))) <= 1e-8


def test_car_kernel_is_laplacian_pinv(rng):
    Lop = laplacian(random_connected_graph(rng, 5))
    spec = CarSpec.from_operator(Lop, np.ones(5), 1)
    np.testing.assert_allclose(spec.kernel, laplacian_kernel(Lop).K)
