"""Shared fixtures and small independent oracles for the test suite."""

import numpy as np
import pytest

from shiftmean.spectral import HalfPanel, PARITY_EVEN, SpectralPanel


def random_spectral_panel(rng, N=32, J=5, scale=1.0):
    """A SpectralPanel with conjugate-symmetric random coefficients."""
    coeffs = np.zeros((N, J), dtype=complex)
    half = N // 2
    coeffs[half] = rng.standard_normal(J) * scale  # k = 0, real
    for k in range(1, half):
        z = (rng.standard_normal(J) + 1j * rng.standard_normal(J)) * scale / (1 + k)
        coeffs[half + k] = z
        coeffs[half - k] = np.conj(z)
    # k = -N/2 has no positive partner; keep it real so samples stay real
    coeffs[0] = rng.standard_normal(J) * scale / (1 + half)
    return SpectralPanel(coeffs=coeffs, parity=PARITY_EVEN)


def half_panel(samples, parity=PARITY_EVEN):
    """Wrap raw samples in a HalfPanel on its natural equispaced grid."""
    samples = np.asarray(samples, dtype=float)
    N = samples.shape[0]
    offset = 2 if parity == PARITY_EVEN else 1
    design = (offset + 2 * np.arange(N)) / (2 * N)
    return HalfPanel(samples=samples, parity=parity, design=design)


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
