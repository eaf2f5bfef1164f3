"""Tests for the alignment criterion, its derivatives and projected descent."""

import numpy as np
import numpy.testing as npt
import pytest

from shiftmean.functions import NoiseModel, ShiftLaw, mixt_gauss, simulate_panel
from shiftmean.registration import (
    OptimizerOptions,
    ShiftVector,
    criterion_M,
    criterion_Mn,
    estimate_shifts,
    grad_Mn,
    hessian_Mn,
    project_theta,
)
from shiftmean.spectral import empirical_coefficients, split_samples, truth_coefficients

from conftest import half_panel, random_spectral_panel


def _random_theta(rng, J, kappa=0.125):
    return project_theta(rng.uniform(-kappa / 2, kappa / 2, J), kappa).values


def _fd_gradient(spec, theta, k0, h=1e-6):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (criterion_Mn(spec, theta + e, k0) - criterion_Mn(spec, theta - e, k0)) / (2 * h)
    return g


# ---------------------------------------------------------------- criterion


def test_criterion_single_curve_is_zero(rng):
    spec = random_spectral_panel(rng, N=16, J=1)
    assert criterion_Mn(spec, np.zeros(1), 3) == 0.0


def test_criterion_identical_columns_zero(rng):
    samples = np.tile(rng.standard_normal(16)[:, None], (1, 4))
    spec = empirical_coefficients(half_panel(samples))
    assert criterion_Mn(spec, np.zeros(4), 5) < 1e-25


def test_criterion_nonnegative_and_shift_invariant(rng):
    for _ in range(20):
        spec = random_spectral_panel(rng, N=32, J=6)
        theta = _random_theta(rng, 6)
        val = criterion_Mn(spec, theta, 4)
        assert val >= 0.0
        c = rng.uniform(-0.5, 0.5)
        assert abs(criterion_Mn(spec, theta + c, 4) - val) < 1e-12


def test_criterion_minimal_at_true_shifts():
    f = mixt_gauss()
    theta_star = np.array([0.02, -0.01, 0.03, -0.04])
    panel = simulate_panel(
        f, 256, 4, ShiftLaw(half_width=0.0), NoiseModel(sigma=0.0), 0, theta_star=theta_star
    )
    even, _ = split_samples(panel)
    spec = empirical_coefficients(even)
    theta0 = theta_star - theta_star.mean()
    at_truth = criterion_Mn(spec, theta0, 5)
    assert at_truth < 1e-12  # noiseless: only the truncation floor remains
    rng = np.random.default_rng(1)
    for _ in range(10):
        other = project_theta(theta0 + rng.uniform(-0.01, 0.01, 4), 0.125).values
        assert criterion_Mn(spec, other, 5) >= at_truth


# -------------------------------------------------------------- derivatives


def test_gradient_matches_finite_differences(rng):
    worst = 0.0
    for _ in range(100):
        J = int(rng.integers(2, 9))
        N = int(rng.integers(8, 65)) // 2 * 2
        k0 = int(rng.integers(1, min(6, N // 2)))
        spec = random_spectral_panel(rng, N=N, J=J)
        theta = _random_theta(rng, J)
        g = grad_Mn(spec, theta, k0)
        fd = _fd_gradient(spec, theta, k0)
        rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, rel)
    assert worst < 1e-6


def test_hessian_matches_differenced_gradient(rng):
    h = 1e-6
    for _ in range(20):
        J = int(rng.integers(3, 7))
        spec = random_spectral_panel(rng, N=32, J=J)
        theta = _random_theta(rng, J)
        H = hessian_Mn(spec, theta, 3)
        npt.assert_allclose(H, H.T)
        fd = np.zeros((J, J))
        for i in range(J):
            e = np.zeros(J)
            e[i] = h
            fd[i] = (grad_Mn(spec, theta + e, 3) - grad_Mn(spec, theta - e, 3)) / (2 * h)
        rel = np.linalg.norm(H - fd) / np.linalg.norm(fd)
        assert rel < 1e-4


def test_hessian_closed_form_at_truth():
    # noiseless panel at the true shifts: all rotated columns coincide, so the
    # Hessian restricted to the sum-zero subspace is
    # (8 pi^2 / J) sum k^2 |c_k|^2 (I - 11^T/J)
    f = mixt_gauss()
    J, k0 = 4, 3
    theta_star = np.array([0.01, -0.02, 0.015, -0.005])
    panel = simulate_panel(
        f, 512, J, ShiftLaw(half_width=0.0), NoiseModel(sigma=0.0), 0, theta_star=theta_star
    )
    even, _ = split_samples(panel)
    spec = empirical_coefficients(even)
    H = hessian_Mn(spec, theta_star - theta_star.mean(), k0)
    c = truth_coefficients(f, k0).coeffs
    k = np.arange(-k0, k0 + 1)
    scale = 8.0 * np.pi**2 / J * float(np.sum(k**2 * np.abs(c) ** 2))
    expected = scale * (np.eye(J) - np.ones((J, J)) / J)
    npt.assert_allclose(H, expected, rtol=1e-8, atol=1e-10)


# ------------------------------------------------------ population criterion


def test_population_criterion_zero_at_truth(rng):
    c = truth_coefficients(mixt_gauss(), 5).coeffs
    for _ in range(20):
        theta_star = rng.uniform(-1 / 16, 1 / 16, 6)
        theta0 = theta_star - theta_star.mean()
        assert criterion_M(c, theta0, theta_star, 5) < 1e-14
        shift = rng.uniform(-0.2, 0.2)
        assert criterion_M(c, theta0 + shift, theta_star, 5) < 1e-14


def test_population_criterion_quadratic_growth(rng):
    kappa = 0.125
    c = truth_coefficients(mixt_gauss(), 5)
    c1 = abs(c.coeffs[6])
    const = 4 * np.pi**2 * c1**2 * np.cos(8 * np.pi * kappa)
    theta_star = rng.uniform(-kappa / 2, kappa / 2, 5)
    theta0 = project_theta(theta_star, kappa).values
    for _ in range(50):
        theta = _random_theta(rng, 5, kappa)
        lhs = criterion_M(c, theta, theta_star, 5) - criterion_M(c, theta0, theta_star, 5)
        rhs = const * np.sum((theta - theta0) ** 2) / 5
        assert lhs >= rhs - 1e-12


def test_population_criterion_validation():
    c = truth_coefficients(mixt_gauss(), 2)
    with pytest.raises(ValueError):
        criterion_M(c, np.zeros(3), np.zeros(3), 5)  # band too small
    with pytest.raises(ValueError):
        criterion_M(np.zeros(5, dtype=complex), np.zeros(3), np.zeros(4), 2)


# ----------------------------------------------------------------- projection


def _projection_oracle(raw, kappa):
    """KKT solution of min ||x - raw||^2 over the box intersect {sum = 0}.

    x(lam) = clip(raw - lam, -kappa/2, kappa/2); sum x(lam) is non-increasing
    in lam, so bisection finds the multiplier.
    """
    lo, hi = raw.min() - kappa, raw.max() + kappa
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum(np.clip(raw - mid, -kappa / 2, kappa / 2)) > 0:
            lo = mid
        else:
            hi = mid
    return np.clip(raw - 0.5 * (lo + hi), -kappa / 2, kappa / 2)


def test_project_theta_idempotent_and_constant(rng):
    kappa = 0.125
    inside = _random_theta(rng, 5, kappa)
    npt.assert_allclose(project_theta(inside, kappa).values, inside, atol=1e-11)
    npt.assert_allclose(project_theta(np.full(4, 0.3), kappa).values, 0.0, atol=1e-11)


def test_project_theta_matches_qp_oracle(rng):
    kappa = 0.125
    for _ in range(50):
        raw = rng.uniform(-0.3, 0.3, 6)
        got = project_theta(raw, kappa).values
        expected = _projection_oracle(raw, kappa)
        npt.assert_allclose(got, expected, atol=1e-8)


def test_project_theta_feasible_and_nonexpansive(rng):
    kappa = 0.1
    for _ in range(50):
        a, b = rng.uniform(-1, 1, 7), rng.uniform(-1, 1, 7)
        pa = project_theta(a, kappa)
        pb = project_theta(b, kappa)
        assert np.all(np.abs(pa.values) <= kappa / 2 + 1e-9)
        assert abs(pa.values.sum()) < 1e-11
        assert np.linalg.norm(pa.values - pb.values) <= np.linalg.norm(a - b) + 1e-10


# ---------------------------------------------------------------- ShiftVector


def test_shift_vector_validation():
    ShiftVector(values=np.array([0.01, -0.01]), kappa=0.125)
    with pytest.raises(ValueError):
        ShiftVector(values=np.array([0.2, -0.2]), kappa=0.125)  # leaves the box
    with pytest.raises(ValueError):
        ShiftVector(values=np.array([0.01, 0.01]), kappa=0.125)  # nonzero sum
    with pytest.raises(ValueError):
        ShiftVector(values=np.zeros((2, 2)), kappa=0.125)


def test_optimizer_options_validation():
    with pytest.raises(ValueError):
        OptimizerOptions(max_iters=0)
    with pytest.raises(ValueError):
        OptimizerOptions(grad_tol=0.0)
    with pytest.raises(ValueError):
        OptimizerOptions(backtrack_factor=1.0)
    with pytest.raises(ValueError):
        OptimizerOptions(armijo_c=0.0)


# ------------------------------------------------------------ shift estimator


def test_estimate_shifts_zero_truth():
    panel = simulate_panel(
        mixt_gauss(), 128, 4, ShiftLaw(half_width=0.0), NoiseModel(sigma=0.0), 0
    )
    even, _ = split_samples(panel)
    theta, diag = estimate_shifts(empirical_coefficients(even), 5, 0.125)
    npt.assert_allclose(theta.values, 0.0, atol=1e-12)
    assert diag.converged


def test_estimate_shifts_noiseless_recovery(rng):
    theta_star = rng.uniform(-1 / 32, 1 / 32, 5)
    panel = simulate_panel(
        mixt_gauss(), 512, 5, ShiftLaw(half_width=0.0), NoiseModel(sigma=0.0), 0,
        theta_star=theta_star,
    )
    even, _ = split_samples(panel)
    theta, diag = estimate_shifts(empirical_coefficients(even), 5, 0.125)
    theta0 = theta_star - theta_star.mean()
    assert np.sum((theta.values - theta0) ** 2) / 5 < 1e-6


def test_estimate_shifts_decreases_criterion(rng):
    panel = simulate_panel(mixt_gauss(), 128, 6, ShiftLaw(), NoiseModel(rsnr=0.5), 3)
    even, _ = split_samples(panel)
    spec = empirical_coefficients(even)
    theta, diag = estimate_shifts(spec, 5, 0.125)
    assert diag.criterion <= criterion_Mn(spec, np.zeros(6), 5)
    assert np.all(np.abs(theta.values) <= 0.125 / 2 + 1e-9)
    assert abs(theta.values.sum()) < 1e-11


def test_estimate_shifts_nonconvergence_is_flagged():
    panel = simulate_panel(mixt_gauss(), 128, 6, ShiftLaw(), NoiseModel(rsnr=0.5), 3)
    even, _ = split_samples(panel)
    spec = empirical_coefficients(even)
    theta, diag = estimate_shifts(spec, 5, 0.125, OptimizerOptions(max_iters=1))
    assert not diag.converged
    assert diag.iterations == 1
    assert isinstance(theta, ShiftVector)
