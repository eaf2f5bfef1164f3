"""Even/odd splitting, empirical Fourier coefficients and the orbit distance.

The panel rows are indexed l = 1..n at t_l = l/n.  The even half keeps rows
l = 2q and the odd half rows l = 2q - 1, q = 1..N with N = n/2, giving two
independent half-samples on shifted copies of the coarse grid q/N.

Empirical coefficients are

    c_hat[k, j] = (1/N) sum_q Y[q, j] exp(-i 2 pi k t_q),  -N/2 <= k < N/2,

computed by an FFT plus the phase factor induced by the grid offset (the odd
grid sits 1/n to the left of the even one); a direct O(N^2) summation is kept
as the reference path for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import CurvePanel, TestFunction, eval_test_function, QUADRATURE_POINTS

PARITY_EVEN = 0
PARITY_ODD = 1

ORBIT_GRID = 4096
ORBIT_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class HalfPanel:
    """One half of a split panel: N x J samples on its own equispaced grid."""

    samples: np.ndarray
    parity: int
    design: np.ndarray

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def J(self) -> int:
        return self.samples.shape[1]


def split_samples(panel: CurvePanel) -> tuple[HalfPanel, HalfPanel]:
    """Split a panel into its even (rows 2q) and odd (rows 2q-1) halves."""
    if panel.n % 2 != 0:
        raise ValueError("panel size must be even")
    Y = panel.samples
    t = panel.design
    even = HalfPanel(samples=Y[1::2], parity=PARITY_EVEN, design=t[1::2])
    odd = HalfPanel(samples=Y[0::2], parity=PARITY_ODD, design=t[0::2])
    return even, odd


@dataclass(frozen=True)
class SpectralPanel:
    """Per-curve empirical Fourier coefficients of one half-sample.

    coeffs has shape (N, J); row r holds frequency k = r - N/2, so the band
    runs over -N/2 <= k < N/2.
    """

    coeffs: np.ndarray
    parity: int

    @property
    def N(self) -> int:
        return self.coeffs.shape[0]

    @property
    def J(self) -> int:
        return self.coeffs.shape[1]

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    def band(self, k0: int) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies and coefficient rows for |k| <= k0."""
        if k0 >= self.N // 2:
            raise ValueError(f"band k0={k0} exceeds the available frequencies")
        half = self.N // 2
        rows = slice(half - k0, half + k0 + 1)
        return np.arange(-k0, k0 + 1), self.coeffs[rows]


def empirical_coefficients(half: HalfPanel) -> SpectralPanel:
    """FFT-based empirical coefficients with the grid-offset phase factor."""
    N = half.N
    if N < 2:
        raise ValueError("need at least two samples per half")
    # t_q = t_1 + (q-1)/N, so the sum is a plain DFT times exp(-i 2 pi k t_1)
    X = np.fft.fftshift(np.fft.fft(half.samples, axis=0), axes=0) / N
    kvec = np.arange(-N // 2, N // 2)
    phase = np.exp(-2j * np.pi * kvec * half.design[0])
    return SpectralPanel(coeffs=phase[:, None] * X, parity=half.parity)


def coefficients_direct(half: HalfPanel) -> SpectralPanel:
    """Reference O(N^2) summation; the FFT path must match it."""
    N = half.N
    kvec = np.arange(-N // 2, N // 2)
    E = np.exp(-2j * np.pi * np.multiply.outer(kvec, half.design))
    return SpectralPanel(coeffs=E @ half.samples / N, parity=half.parity)


@dataclass(frozen=True)
class MeanEstimate:
    """Band-limited real curve: complex coefficients for |k| <= m."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise ValueError("coeffs must be a vector of odd length 2m+1")
        object.__setattr__(self, "coeffs", coeffs)
        scale = max(float(np.max(np.abs(coeffs))), 1.0)
        if np.max(np.abs(coeffs - np.conj(coeffs[::-1]))) > 1e-8 * scale:
            raise ValueError("coefficients are not conjugate-symmetric")

    @property
    def m(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    def padded(self, m: int) -> np.ndarray:
        """Coefficients zero-padded to the band |k| <= m."""
        if m < self.m:
            raise ValueError("cannot pad to a smaller band")
        out = np.zeros(2 * m + 1, dtype=complex)
        out[m - self.m : m + self.m + 1] = self.coeffs
        return out

    def shifted(self, tau: float) -> "MeanEstimate":
        """Coefficients of t -> f(t - tau)."""
        return MeanEstimate(self.coeffs * np.exp(-2j * np.pi * self.k_values * tau))

    def __call__(self, grid):
        return reconstruct(self, grid)


def reconstruct(est: MeanEstimate, grid) -> np.ndarray:
    """Evaluate the band-limited curve on an arbitrary grid (real output)."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    phases = np.exp(2j * np.pi * np.multiply.outer(grid, est.k_values))
    vals = phases @ est.coeffs
    scale = max(float(np.max(np.abs(vals))), 1.0) if vals.size else 1.0
    if np.max(np.abs(vals.imag)) > 1e-8 * scale:
        raise ValueError("reconstruction is not real: asymmetric coefficients")
    return vals.real


def truth_coefficients(
    f: TestFunction, m: int, resolution: int = QUADRATURE_POINTS
) -> MeanEstimate:
    """Quadrature Fourier coefficients of a test function, band |k| <= m."""
    if m >= resolution // 2:
        raise ValueError("band exceeds the quadrature resolution")
    grid = (np.arange(resolution) + 0.5) / resolution
    vals = eval_test_function(f, grid)
    X = np.fft.fft(vals) / resolution
    kvec = np.arange(-m, m + 1)
    phase = np.exp(-2j * np.pi * kvec * grid[0])
    coeffs = phase * X[np.mod(kvec, resolution)]
    return MeanEstimate(coeffs)


def _cross_profile(a: MeanEstimate, b: MeanEstimate) -> tuple[np.ndarray, float]:
    """Cross terms c_k = a_k conj(b_k) on a common band, plus total energy."""
    m = max(a.m, b.m)
    ac, bc = a.padded(m), b.padded(m)
    energy = float(np.sum(np.abs(ac) ** 2) + np.sum(np.abs(bc) ** 2))
    return ac * np.conj(bc), energy


def _sq_distance_at(cross: np.ndarray, energy: float, theta) -> np.ndarray:
    m = (cross.size - 1) // 2
    kvec = np.arange(-m, m + 1)
    h = np.real(np.exp(-2j * np.pi * np.multiply.outer(np.atleast_1d(theta), kvec)) @ cross)
    return energy - 2.0 * h


def orbit_distance(a: MeanEstimate, b: MeanEstimate) -> tuple[float, float]:
    """Shift-orbit distance between two band-limited curves.

    Returns (d, theta_hat) where d = min over theta of the L2 distance
    between the theta-shift of a and b (Parseval form), and theta_hat in
    [-1/2, 1/2) attains the minimum.  Coarse search on a 4096-point grid is
    refined by golden-section to a bracket below 1e-12.
    """
    cross, _ = _cross_profile(a, b)
    m = (cross.size - 1) // 2
    # h(theta_i) on the regular grid i/G via one FFT of the placed cross terms
    G = ORBIT_GRID
    placed = np.zeros(G, dtype=complex)
    kvec = np.arange(-m, m + 1)
    np.add.at(placed, np.mod(kvec, G), cross)
    h = np.real(np.fft.fft(placed))
    i0 = int(np.argmax(h))
    lo, hi = (i0 - 1) / G, (i0 + 1) / G

    # refine with the direct squared distance: the cross-term form cancels
    # catastrophically near a zero minimum and would stall the refinement
    ac, bc = a.padded(m), b.padded(m)
    fun = lambda th: float(
        np.sum(np.abs(ac * np.exp(-2j * np.pi * kvec * th) - bc) ** 2)
    )
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    while hi - lo > ORBIT_REFINE_TOL:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = fun(x2)
    theta = 0.5 * (lo + hi)
    d2 = fun(theta)
    theta = (theta + 0.5) % 1.0 - 0.5
    return float(np.sqrt(d2)), float(theta)
