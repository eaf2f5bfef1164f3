"""Smoothed Frechet mean: alignment, penalized cutoff selection, baselines.

The odd half-sample is aligned with the shifts estimated on the even half,
its coefficients are averaged across curves, and the frequency cutoff is
chosen by penalized model selection:

    m_hat = argmin_m  sum_{m < |k| <= m1} |a_k|^2 + eta (2m+1) sigma^2 / (N J),

the first term being the exact Parseval form of the L2 distance between the
cutoff-m and cutoff-m1 aligned means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import CurvePanel, calibrate_sigma
from .registration import (
    OptimizerOptions,
    RegistrationDiagnostics,
    ShiftVector,
    estimate_shifts,
    _theta_values,
)
from .spectral import MeanEstimate, SpectralPanel, empirical_coefficients, split_samples


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning scalars of the full estimation pipeline."""

    k0: int = 5
    kappa: float = 0.125
    eta: float = 2.5
    m1: int | None = None  # None: use floor(N/2) - 1
    sigma: float | None = None
    rsnr: float | None = None
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)

    def __post_init__(self):
        if self.eta <= 1:
            raise ValueError("eta must be > 1")
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if not (0 < self.kappa <= 0.25):
            raise ValueError("kappa must lie in (0, 1/4]")

    def resolve_m1(self, N: int) -> int:
        m1 = N // 2 - 1 if self.m1 is None else self.m1
        if not (1 <= m1 < N / 2):
            raise ValueError(f"m1={m1} must satisfy 1 <= m1 < N/2 with N={N}")
        return m1

    def resolve_sigma(self, panel: CurvePanel) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        if self.rsnr is not None and panel.truth is not None:
            return calibrate_sigma(panel.truth.function, self.rsnr)
        if panel.truth is not None:
            return float(panel.truth.sigma)
        raise ValueError("sigma is unknown: set sigma (or rsnr with simulated truth)")


@dataclass(frozen=True)
class EstimateDiagnostics:
    m_hat: int
    m1: int
    sigma: float
    registration: RegistrationDiagnostics | None


def smoothed_mean(spec_odd: SpectralPanel, theta_hat, m: int) -> MeanEstimate:
    """Aligned across-curve mean of the odd-half coefficients, band |k| <= m."""
    theta = _theta_values(theta_hat)
    if not (1 <= m < spec_odd.N / 2):
        raise ValueError(f"m={m} out of range for N={spec_odd.N}")
    kvec, C = spec_odd.band(m)
    aligned = C * np.exp(2j * np.pi * np.multiply.outer(kvec, theta))
    return MeanEstimate(aligned.mean(axis=1))


def select_cutoff(spec_odd: SpectralPanel, theta_hat, cfg: EstimatorConfig) -> int:
    """Penalized cutoff choice; ties broken toward the smaller m."""
    sigma = cfg.sigma
    if sigma is None:
        raise ValueError("select_cutoff needs a concrete sigma in the config")
    m1 = cfg.resolve_m1(spec_odd.N)
    a = smoothed_mean(spec_odd, theta_hat, m1).coeffs
    abs2 = np.abs(a) ** 2
    ms = np.arange(1, m1 + 1)
    # tail(m) = sum over m < |k| <= m1 of |a_k|^2
    pos = abs2[m1 + 1 :]  # k = 1..m1
    neg = abs2[:m1][::-1]  # k = -1..-m1
    tail_from = np.cumsum((pos + neg)[::-1])[::-1]  # tail_from[i] = sum_{|k|>i}
    tails = np.append(tail_from[1:], 0.0)  # tails[m-1] for m = 1..m1
    penalty = cfg.eta * (2 * ms + 1) * sigma**2 / (spec_odd.N * spec_odd.J)
    crit = tails + penalty
    return int(ms[np.argmin(crit)])


def estimate_mean(
    panel: CurvePanel, cfg: EstimatorConfig
) -> tuple[MeanEstimate, ShiftVector, EstimateDiagnostics]:
    """Full pipeline: split, register on the even half, average the odd half."""
    sigma = cfg.resolve_sigma(panel)
    even, odd = split_samples(panel)
    spec_even = empirical_coefficients(even)
    theta_hat, reg = estimate_shifts(spec_even, cfg.k0, cfg.kappa, cfg.optimizer)
    spec_odd = empirical_coefficients(odd)
    cfg_sigma = _with_sigma(cfg, sigma)
    m_hat = select_cutoff(spec_odd, theta_hat, cfg_sigma)
    est = smoothed_mean(spec_odd, theta_hat, m_hat)
    diag = EstimateDiagnostics(
        m_hat=m_hat, m1=cfg.resolve_m1(spec_odd.N), sigma=sigma, registration=reg
    )
    return est, theta_hat, diag


def oracle_mean(panel: CurvePanel, true_shifts, cfg: EstimatorConfig) -> MeanEstimate:
    """Ideal estimator aligning the odd half with the true shifts."""
    shifts = np.asarray(true_shifts, dtype=float)
    if shifts.shape != (panel.J,):
        raise ValueError("true_shifts must have length J")
    sigma = cfg.resolve_sigma(panel)
    _, odd = split_samples(panel)
    spec_odd = empirical_coefficients(odd)
    cfg_sigma = _with_sigma(cfg, sigma)
    m_star = select_cutoff(spec_odd, shifts, cfg_sigma)
    return smoothed_mean(spec_odd, shifts, m_star)


def naive_mean(panel: CurvePanel, m: int) -> MeanEstimate:
    """Unaligned across-curve mean of the odd-half coefficients."""
    _, odd = split_samples(panel)
    spec_odd = empirical_coefficients(odd)
    return smoothed_mean(spec_odd, np.zeros(panel.J), m)


def naive_cutoff(panel: CurvePanel, cfg: EstimatorConfig) -> int:
    """Penalized cutoff for the unaligned mean (zero shifts in the selection)."""
    _, odd = split_samples(panel)
    cfg = _with_sigma(cfg, cfg.resolve_sigma(panel))
    return select_cutoff(empirical_coefficients(odd), np.zeros(panel.J), cfg)


def _with_sigma(cfg: EstimatorConfig, sigma: float) -> EstimatorConfig:
    if cfg.sigma == sigma:
        return cfg
    return EstimatorConfig(
        k0=cfg.k0,
        kappa=cfg.kappa,
        eta=cfg.eta,
        m1=cfg.m1,
        sigma=sigma,
        rsnr=None,
        optimizer=cfg.optimizer,
    )
