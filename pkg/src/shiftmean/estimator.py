"""scikit-learn style front end for the smoothed Frechet mean pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .frechet import EstimatorConfig, estimate_mean
from .functions import CurvePanel
from .registration import OptimizerOptions
from .spectral import reconstruct


class FrechetMeanEstimator(BaseEstimator, TransformerMixin):
    """Estimate the mean pattern of randomly shifted, noisy periodic curves.

    The input X holds one sampled curve per row, shape (n_curves, n_points),
    observed on the equispaced grid t_l = l/n_points with n_points even.
    Fitting registers the curves (estimating one time shift per curve from
    the even-indexed samples) and averages the aligned odd-indexed samples
    in the Fourier domain, with a penalized choice of the frequency cutoff.

    Parameters
    ----------
    sigma : float
        Known standard deviation of the additive Gaussian noise.
    k0 : int, default 5
        Frequency band of the alignment criterion.
    kappa : float, default 1/8
        Shift-support parameter; estimated shifts are constrained to the box
        [-kappa/2, kappa/2] and to sum to zero.
    eta : float, default 2.5
        Penalty constant of the cutoff selection (must exceed 1).
    m1 : int or None, default None
        Maximal cutoff; None means floor(n_points/4) - 1.
    max_iters, grad_tol : optimizer controls for the projected descent.

    Attributes
    ----------
    shifts_ : ndarray of shape (n_curves,)
        Estimated (centered) time shift of each training curve.
    mean_ : MeanEstimate
        Complex Fourier coefficients of the estimated mean, |k| <= m_hat_.
    m_hat_ : int
        Selected frequency cutoff.
    diagnostics_ : EstimateDiagnostics
        Optimizer convergence report and resolved configuration.
    """

    def __init__(
        self,
        sigma=None,
        k0=5,
        kappa=0.125,
        eta=2.5,
        m1=None,
        max_iters=500,
        grad_tol=1e-9,
    ):
        self.sigma = sigma
        self.k0 = k0
        self.kappa = kappa
        self.eta = eta
        self.m1 = m1
        self.max_iters = max_iters
        self.grad_tol = grad_tol

    def _config(self) -> EstimatorConfig:
        if self.sigma is None:
            raise ValueError("sigma is required: the noise level is assumed known")
        return EstimatorConfig(
            k0=self.k0,
            kappa=self.kappa,
            eta=self.eta,
            m1=self.m1,
            sigma=float(self.sigma),
            optimizer=OptimizerOptions(max_iters=self.max_iters, grad_tol=self.grad_tol),
        )

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n_curves, n_points = X.shape
        if n_curves < 2:
            raise ValueError("registration needs at least 2 curves")
        if n_points % 2 != 0 or n_points < 4:
            raise ValueError("n_points must be even and >= 4")
        panel = CurvePanel(samples=X.T, design=np.arange(1, n_points + 1) / n_points)
        est, theta, diag = estimate_mean(panel, self._config())
        self.n_features_in_ = n_points
        self.mean_ = est
        self.shifts_ = theta.values.copy()
        self.m_hat_ = diag.m_hat
        self.diagnostics_ = diag
        return self

    def predict(self, T):
        """Evaluate the estimated mean curve at arbitrary times T."""
        check_is_fitted(self, "mean_")
        T = np.asarray(T, dtype=float).ravel()
        return reconstruct(self.mean_, T)

    def transform(self, X):
        """Align curves by the fitted shifts: row j becomes x_j(t + shift_j).

        The alignment is exact for band-limited rows (circular Fourier phase
        rotation on the observation grid); X must have the training shape.
        """
        check_is_fitted(self, "shifts_")
        X = check_array(X, dtype=np.float64)
        if X.shape != (self.shifts_.size, self.n_features_in_):
            raise ValueError("transform expects the training panel shape")
        n = X.shape[1]
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        phase = np.exp(2j * np.pi * np.multiply.outer(self.shifts_, freqs))
        return np.real(np.fft.ifft(np.fft.fft(X, axis=1) * phase, axis=1))
