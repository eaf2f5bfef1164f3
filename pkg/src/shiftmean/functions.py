"""Test functions, noise calibration and the shifted-curves observation model.

Curves live on the circle R/Z: every mean pattern is 1-periodic and is
sampled on the equispaced design t_l = l/n, l = 1..n.  A panel of J noisy
curves is generated as

    Y[l, j] = f(t_l - shift_j) + noise[l, j]

with i.i.d. shifts drawn from a compactly supported law and i.i.d. Gaussian
noise of known standard deviation (optionally calibrated from a requested
root signal-to-noise ratio).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Resolution of the composite midpoint rule used for all integrals of test
# functions (Fourier coefficients, centered energy, gradient energy).
QUADRATURE_POINTS = 2**14

# MixtGauss bump parameters (amplitude, center, width).  Three well-separated
# bumps; periodization over five integer translates is exact to double
# precision for widths this small.
MIXT_GAUSS_BUMPS = (
    (1.0, 0.25, 0.03),
    (0.8, 0.50, 0.05),
    (1.2, 0.75, 0.03),
)

_PERIODIZATION_TRANSLATES = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class TestFunction:
    """A 1-periodic mean pattern.

    kind is one of 'mixtgauss', 'heavisine' or 'fourier'.  For 'fourier' the
    params hold the complex coefficients (c_0, c_1, ..., c_m); negative
    frequencies follow by conjugate symmetry so the function is real valued.
    sobolev optionally records (smoothness, ball radius) for rate bookkeeping.
    """

    kind: str
    params: tuple = ()
    sobolev: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("mixtgauss", "heavisine", "fourier"):
            raise ValueError(f"unknown test function kind: {self.kind!r}")
        if self.kind == "fourier" and len(self.params) == 0:
            raise ValueError("fourier kind requires at least c_0")

    def __call__(self, t):
        return eval_test_function(self, t)

    def derivative(self, t):
        """Analytic derivative; only defined for smooth kinds."""
        t = np.asarray(t, dtype=float)
        tm = np.mod(t, 1.0)
        if self.kind == "mixtgauss":
            out = np.zeros_like(tm)
            for a, mu, w in MIXT_GAUSS_BUMPS:
                for r in _PERIODIZATION_TRANSLATES:
                    d = tm - mu - r
                    out += -a * d / w**2 * np.exp(-(d**2) / (2.0 * w**2))
            return out
        if self.kind == "fourier":
            ks = np.arange(len(self.params))
            cs = np.asarray(self.params, dtype=complex)
            phases = np.exp(2j * np.pi * np.multiply.outer(tm, ks))
            return 2.0 * np.real(phases @ (2j * np.pi * ks * cs))
        raise ValueError(f"{self.kind} is not continuously differentiable")


def mixt_gauss() -> TestFunction:
    """Mixture of three periodized Gaussian bumps (smooth benchmark)."""
    return TestFunction("mixtgauss", sobolev=(2.0, None))


def heavi_sine() -> TestFunction:
    """Piecewise-smooth benchmark with one jump: 4 sin(4 pi t) minus two signs."""
    return TestFunction("heavisine")


def user_fourier(coeffs: Sequence[complex]) -> TestFunction:
    """Real curve from nonnegative-frequency coefficients (c_0, c_1, ...)."""
    return TestFunction("fourier", params=tuple(complex(c) for c in coeffs))


def eval_test_function(f: TestFunction, t) -> np.ndarray:
    """Evaluate the 1-periodic extension of f at arbitrary real t."""
    t = np.asarray(t, dtype=float)
    tm = np.mod(t, 1.0)
    if f.kind == "mixtgauss":
        out = np.zeros_like(tm)
        for a, mu, w in MIXT_GAUSS_BUMPS:
            for r in _PERIODIZATION_TRANSLATES:
                out += a * np.exp(-((tm - mu - r) ** 2) / (2.0 * w**2))
        return out
    if f.kind == "heavisine":
        return 4.0 * np.sin(4.0 * np.pi * tm) - np.sign(tm - 0.3) - np.sign(0.72 - tm)
    # fourier: c_0 real part plus twice the real part of positive frequencies
    cs = np.asarray(f.params, dtype=complex)
    ks = np.arange(1, len(cs))
    out = np.full_like(tm, np.real(cs[0]))
    if ks.size:
        phases = np.exp(2j * np.pi * np.multiply.outer(tm, ks))
        out = out + 2.0 * np.real(phases @ cs[1:])
    return out


def quadrature_grid(resolution: int = QUADRATURE_POINTS) -> np.ndarray:
    """Midpoints of the composite midpoint rule on [0, 1]."""
    return (np.arange(resolution) + 0.5) / resolution


def centered_energy(f: TestFunction, resolution: int = QUADRATURE_POINTS) -> float:
    """Integral of (f - mean(f))^2 over one period, by midpoint quadrature."""
    vals = eval_test_function(f, quadrature_grid(resolution))
    return float(np.mean((vals - vals.mean()) ** 2))


def calibrate_sigma(f: TestFunction, rsnr: float, resolution: int = QUADRATURE_POINTS) -> float:
    """Noise standard deviation matching a requested root signal-to-noise ratio.

    rsnr = sqrt(integral (f - mean f)^2) / sigma, hence
    sigma = sqrt(centered energy) / rsnr.
    """
    if rsnr <= 0:
        raise ValueError("rsnr must be positive")
    energy = centered_energy(f, resolution)
    if energy < 1e-14:
        raise ValueError("constant test function: rsnr calibration undefined")
    return float(np.sqrt(energy) / rsnr)


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise level, given directly or derived from rsnr."""

    sigma: float | None = None
    rsnr: float | None = None

    def __post_init__(self):
        if (self.sigma is None) == (self.rsnr is None):
            raise ValueError("give exactly one of sigma or rsnr")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.rsnr is not None and self.rsnr <= 0:
            raise ValueError("rsnr must be > 0")

    def resolve(self, f: TestFunction) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        return calibrate_sigma(f, self.rsnr)


@dataclass(frozen=True)
class ShiftLaw:
    """Distribution of the random time shifts, supported in [-kappa/2, kappa/2].

    kind 'uniform': symmetric uniform on [-half_width, half_width] with
    half_width <= 1/16 (half_width = 0 is the degenerate point mass at 0,
    used for noiseless sanity checks).  kind 'user': caller supplies a
    density and a sampler; support_half_width declares the support.
    """

    kind: str = "uniform"
    half_width: float = 1.0 / 16.0
    density: Callable[[np.ndarray], np.ndarray] | None = None
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "user"):
            raise ValueError(f"unknown shift law kind: {self.kind!r}")
        if self.half_width < 0 or self.half_width > 1.0 / 16.0:
            raise ValueError("half_width must lie in [0, 1/16]")
        if self.kind == "user" and self.sampler is None:
            raise ValueError("user shift law requires a sampler")

    @property
    def kappa(self) -> float:
        """Support parameter: the support is contained in [-kappa/2, kappa/2]."""
        return 2.0 * self.half_width

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            if self.half_width == 0.0:
                return np.zeros(size)
            return rng.uniform(-self.half_width, self.half_width, size=size)
        draws = np.asarray(self.sampler(rng, size), dtype=float)
        if draws.shape != (size,):
            raise ValueError("sampler returned wrong shape")
        if np.any(np.abs(draws) > self.half_width + 1e-12):
            raise ValueError("sampled shifts leave the declared support")
        return draws


@dataclass(frozen=True)
class PanelTruth:
    """Ground truth carried by simulated panels."""

    shifts: np.ndarray
    function: TestFunction
    sigma: float


@dataclass(frozen=True)
class CurvePanel:
    """n x J matrix of noisy shifted samples on the design t_l = l/n."""

    samples: np.ndarray
    design: np.ndarray
    truth: PanelTruth | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        n, J = samples.shape
        if n % 2 != 0 or n < 4:
            raise ValueError("n must be even and >= 4")
        if J < 1:
            raise ValueError("panel needs at least one curve")
        expected = np.arange(1, n + 1) / n
        if not np.array_equal(np.asarray(self.design), expected):
            raise ValueError("design must be exactly l/n for l = 1..n")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def J(self) -> int:
        return self.samples.shape[1]


def simulate_panel(
    f: TestFunction,
    n: int,
    J: int,
    law: ShiftLaw,
    noise: NoiseModel,
    seed,
    theta_star: np.ndarray | None = None,
) -> CurvePanel:
    """Simulate a panel of J randomly shifted noisy curves on n design points.

    seed may be an integer or a numpy SeedSequence; identical seeds produce
    bit-identical panels (shifts are drawn first, then noise column by
    column).  theta_star overrides the random shifts when given (tests and
    noiseless checks).
    """
    if n % 2 != 0 or n < 4:
        raise ValueError("n must be even and >= 4")
    if J < 2:
        raise ValueError("J must be >= 2")
    rng = np.random.default_rng(seed)
    if theta_star is None:
        shifts = law.sample(rng, J)
    else:
        shifts = np.asarray(theta_star, dtype=float)
        if shifts.shape != (J,):
            raise ValueError("theta_star must have length J")
    sigma = noise.resolve(f)
    design = np.arange(1, n + 1) / n
    clean = eval_test_function(f, design[:, None] - shifts[None, :])
    eps = rng.standard_normal((J, n)).T  # column-major draw order
    samples = clean + sigma * eps
    return CurvePanel(samples=samples, design=design, truth=PanelTruth(shifts, f, sigma))
