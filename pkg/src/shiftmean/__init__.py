"""Smoothed Frechet means of randomly shifted, noisy periodic curves."""

__version__ = "0.1.0"

from .estimator import FrechetMeanEstimator
from .frechet import EstimatorConfig, estimate_mean, naive_mean, oracle_mean, select_cutoff, smoothed_mean
from .functions import (
    CurvePanel,
    NoiseModel,
    ShiftLaw,
    TestFunction,
    calibrate_sigma,
    eval_test_function,
    heavi_sine,
    mixt_gauss,
    simulate_panel,
    user_fourier,
)
from .registration import (
    OptimizerOptions,
    ShiftVector,
    criterion_M,
    criterion_Mn,
    estimate_shifts,
    grad_Mn,
    hessian_Mn,
    project_theta,
)
from .spectral import (
    MeanEstimate,
    SpectralPanel,
    empirical_coefficients,
    orbit_distance,
    reconstruct,
    split_samples,
    truth_coefficients,
)
from .experiment import (
    SweepGrid,
    rate_slope,
    relative_error_sweep,
    risk_montecarlo,
    shift_mse,
    shift_rate_ladder,
    van_trees_bound,
)
