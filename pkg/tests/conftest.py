import math

import numpy as np
import pytest
from hypothesis import settings

from shearwave.dispersion import calibrate_sigma
from shearwave.profiles import LatticeSpec, ShearProfile, WaveParams
from shearwave.spectral import VerticalGrid

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

TWO_PI = 2.0 * math.pi


@pytest.fixture
def lattice():
    return LatticeSpec(TWO_PI, TWO_PI)


@pytest.fixture
def vgrid():
    return VerticalGrid.chebyshev(1.0, 33)


@pytest.fixture
def uniform():
    return ShearProfile.constant(1.0, 1.0)


@pytest.fixture
def affine():
    return ShearProfile.poly([2.0, 1.0], 1.0)


def calibrated(profile, g, lattice, target):
    return WaveParams(g, calibrate_sigma(profile, g, lattice, target))


def rk4(f, y0, a, b, n):
    """Fixed-step classical Runge-Kutta; returns the grid and the states."""
    h = (b - a) / n
    x = a + h * np.arange(n + 1)
    y = np.empty((n + 1,) + np.shape(y0))
    y[0] = y0
    for i in range(n):
        xi, yi = x[i], y[i]
        k1 = f(xi, yi)
        k2 = f(xi + h / 2, yi + h / 2 * k1)
        k3 = f(xi + h / 2, yi + h / 2 * k2)
        k4 = f(xi + h, yi + h * k3)
        y[i + 1] = yi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x, y


_ACCEPTANCE = []


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for msg in sorted(_ACCEPTANCE, key=lambda m: int(m.split()[1][1:])):
            terminalreporter.write_line(msg)
