"""Shared fixtures: spectra are expensive, so they are built once per session."""

import numpy as np
import pytest

from rieszlab.domains import make_domain
from rieszlab.galerkin import BasisSpec, SpectralParams, extrapolated_spectrum, spectrum_for


@pytest.fixture(scope="session")
def unit_square():
    return make_domain("rectangle", 1.0, 1.0)


@pytest.fixture(scope="session")
def square_spectrum(unit_square):
    """Unit square, m = 1, 32x32 sines, 350 eigenvalues."""
    return spectrum_for(unit_square, SpectralParams(2, 1.0), BasisSpec("tensor_sine", (32, 32)), 350)


@pytest.fixture(scope="session")
def extrapolated_square_spectrum(unit_square):
    """Unit square, m = 1, sine basis extrapolated over 20..32 modes per axis."""
    return extrapolated_spectrum(unit_square, SpectralParams(2, 1.0), (20, 24, 28, 32), 350)


@pytest.fixture(scope="session")
def small_square_spectrum(unit_square):
    """Unit square, m = 0, 12x12 sines, all eigenvalues."""
    return spectrum_for(unit_square, SpectralParams(2, 0.0), BasisSpec("tensor_sine", (12, 12)), 144)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
