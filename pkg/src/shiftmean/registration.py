"""Shift registration: alignment criterion, derivatives and projected descent.

The empirical criterion measures the dispersion of phase-rotated Fourier
coefficients around their across-curve mean on the band |k| <= k0:

    Mn(theta) = (1/J) sum_j sum_{|k|<=k0}
                | c_hat[k,j] e^{i 2 pi k theta_j} - mean_j'(...) |^2.

Minimization runs over the constrained set Theta_kappa (box
[-kappa/2, kappa/2]^J intersected with the zero-sum hyperplane) by projected
gradient descent with Armijo backtracking; the Euclidean projection onto the
intersection is computed by Dykstra's alternating projections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import MeanEstimate, SpectralPanel

DYKSTRA_TOL = 1e-12
DYKSTRA_MAX_ROUNDS = 10_000


@dataclass(frozen=True)
class ShiftVector:
    """A J-vector of shifts in Theta_kappa: boxed entries summing to zero."""

    values: np.ndarray
    kappa: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("shift vector must be one-dimensional")
        if np.any(np.abs(values) > self.kappa / 2 + 1e-9):
            raise ValueError("shift entries leave the box [-kappa/2, kappa/2]")
        if abs(values.sum()) > 1e-12 * max(values.size, 1):
            raise ValueError("shift entries must sum to zero")
        object.__setattr__(self, "values", values)

    @property
    def J(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class OptimizerOptions:
    max_iters: int = 500
    grad_tol: float = 1e-9
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if min(self.grad_tol, self.step_init) <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.backtrack_factor < 1 and 0 < self.armijo_c < 1):
            raise ValueError("backtrack_factor and armijo_c must lie in (0, 1)")


@dataclass(frozen=True)
class RegistrationDiagnostics:
    iterations: int
    converged: bool
    criterion: float
    grad_norm: float


def _theta_values(theta) -> np.ndarray:
    if isinstance(theta, ShiftVector):
        return theta.values
    return np.asarray(theta, dtype=float)


def _rotated(spec: SpectralPanel, theta: np.ndarray, k0: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies and the phase-rotated coefficient block on |k| <= k0."""
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    kvec, C = spec.band(k0)
    V = C * np.exp(2j * np.pi * np.multiply.outer(kvec, theta))
    return kvec, V


def criterion_Mn(spec: SpectralPanel, theta, k0: int) -> float:
    theta = _theta_values(theta)
    _, V = _rotated(spec, theta, k0)
    vbar = V.mean(axis=1)
    return float(np.sum(np.abs(V - vbar[:, None]) ** 2) / theta.size)


def grad_Mn(spec: SpectralPanel, theta, k0: int) -> np.ndarray:
    """Exact gradient of criterion_Mn with respect to theta."""
    theta = _theta_values(theta)
    J = theta.size
    kvec, V = _rotated(spec, theta, k0)
    S = V.sum(axis=1)
    terms = np.real(1j * np.conj(V) * S[:, None])
    return 4.0 * np.pi / J**2 * (kvec @ terms)


def hessian_Mn(spec: SpectralPanel, theta, k0: int) -> np.ndarray:
    """Exact (symmetric) Hessian of criterion_Mn."""
    theta = _theta_values(theta)
    J = theta.size
    kvec, V = _rotated(spec, theta, k0)
    W = np.conj(V) * (kvec**2)[:, None]
    B = np.real(W.T @ V)  # B[l, l'] = sum_k k^2 Re[conj(V_kl) V_kl']
    scale = 8.0 * np.pi**2 / J**2
    H = -scale * B
    np.fill_diagonal(H, scale * (B.sum(axis=1) - np.diag(B)))
    return 0.5 * (H + H.T)


def criterion_M(true_coeffs, theta, theta_star, k0: int) -> float:
    """Population criterion: Mn with c_k e^{-i 2 pi k theta*_j} in place of data."""
    theta = _theta_values(theta)
    theta_star = np.asarray(theta_star, dtype=float)
    if theta.shape != theta_star.shape:
        raise ValueError("theta and theta_star must have equal length")
    if isinstance(true_coeffs, MeanEstimate):
        if true_coeffs.m < k0:
            raise ValueError("true coefficients do not cover the band")
        c = true_coeffs.padded(true_coeffs.m)[true_coeffs.m - k0 : true_coeffs.m + k0 + 1]
    else:
        c = np.asarray(true_coeffs, dtype=complex)
        if c.size != 2 * k0 + 1:
            raise ValueError("expected coefficients for |k| <= k0")
    kvec = np.arange(-k0, k0 + 1)
    V = c[:, None] * np.exp(2j * np.pi * np.multiply.outer(kvec, theta - theta_star))
    vbar = V.mean(axis=1)
    return float(np.sum(np.abs(V - vbar[:, None]) ** 2) / theta.size)


def project_theta(raw, kappa: float) -> ShiftVector:
    """Euclidean projection onto Theta_kappa by Dykstra's alternating scheme."""
    x = np.asarray(raw, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(DYKSTRA_MAX_ROUNDS):
        y = np.clip(x + p, -kappa / 2, kappa / 2)
        p = x + p - y
        x_new = (y + q) - np.mean(y + q)
        q = y + q - x_new
        change = np.max(np.abs(x_new - x))
        x = x_new
        # the iterates can plateau while the increments drain, so require
        # near-feasibility for the box as well as a small successive change
        if change < DYKSTRA_TOL and np.max(np.abs(x)) <= kappa / 2 + DYKSTRA_TOL:
            break
    # the hyperplane projection ran last, so the sum is zero to round-off;
    # clamp any residual box violation of the same order
    x = np.clip(x, -kappa / 2, kappa / 2)
    x = x - x.mean()
    return ShiftVector(values=x, kappa=kappa)


def estimate_shifts(
    spec: SpectralPanel,
    k0: int,
    kappa: float,
    opts: OptimizerOptions | None = None,
) -> tuple[ShiftVector, RegistrationDiagnostics]:
    """Minimize the alignment criterion over Theta_kappa by projected descent.

    Starts at theta = 0; each step projects an Armijo-backtracked gradient
    step back onto Theta_kappa.  Non-convergence is reported in the
    diagnostics, never raised: the best iterate is always returned.
    """
    opts = opts or OptimizerOptions()
    J = spec.J
    theta = np.zeros(J)
    value = criterion_Mn(spec, theta, k0)
    sqrtJ = np.sqrt(J)
    converged = False
    it = 0
    step_start = opts.step_init
    for it in range(1, opts.max_iters + 1):
        g = grad_Mn(spec, theta, k0)
        pg = theta - project_theta(theta - g, kappa).values
        grad_norm = float(np.linalg.norm(pg))
        if grad_norm < opts.grad_tol * sqrtJ:
            converged = True
            break
        # warm-start the line search near the last accepted step
        step = min(step_start / opts.backtrack_factor, opts.step_init)
        accepted = False
        while step > 1e-18:
            cand = project_theta(theta - step * g, kappa).values
            d = cand - theta
            cand_value = criterion_Mn(spec, cand, k0)
            if cand_value <= value + opts.armijo_c * float(g @ d):
                accepted = True
                break
            step *= opts.backtrack_factor
        if not accepted or np.max(np.abs(cand - theta)) == 0.0:
            # stalled at the constraint boundary or at round-off scale
            converged = grad_norm < opts.grad_tol * sqrtJ
            break
        theta, value = cand, cand_value
        step_start = step
    g = grad_Mn(spec, theta, k0)
    grad_norm = float(np.linalg.norm(theta - project_theta(theta - g, kappa).values))
    converged = converged or grad_norm < opts.grad_tol * sqrtJ
    shift = project_theta(theta, kappa)
    diag = RegistrationDiagnostics(
        iterations=it, converged=converged, criterion=value, grad_norm=grad_norm
    )
    return shift, diag
