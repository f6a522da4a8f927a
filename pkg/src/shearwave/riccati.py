"""Riccati log-derivative q_k of the first-order pressure and its envelope.

For a wavevector k != 0 the first-order pressure coefficient obeys
(P'/U^2)' = |k|^2 P/U^2 with P'(-d) = 0.  Its log-derivative q = P'/P solves

    q' = 2 (U'/U) q + |k|^2 - q^2,    q(-d) = 0,

and is trapped between the explicit tanh solutions obtained by freezing U'/U
at its infimum (lower bound) and supremum (upper bound).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import _kernels
from .errors import BoundViolation, IntegrationFailure, ParameterError, ZeroFirstComponent
from .profiles import logderiv_extrema, require_zero_free

DEFAULT_TOL = 1e-10
MAX_STEPS = 2_000_000
ENVELOPE_FLOOR = 1e-12


def chebyshev_nodes(depth, n):
    """n Chebyshev-Lobatto nodes on [-depth, 0], ascending, endpoints exact."""
    if n < 2:
        raise ParameterError("need at least two vertical nodes")
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    z = 0.5 * depth * (x - 1.0)
    z[0], z[-1] = -depth, 0.0
    return z


def _norm_k(k):
    k1, k2 = float(k[0]), float(k[1])
    return k1, k2, k1 * k1 + k2 * k2


def riccati_rhs(profile, ksq, x3, q):
    return 2.0 * profile.logderiv(x3) * q + ksq - q * q


def riccati_bounds(k, m, d):
    """Explicit solution of l' = 2 m l + |k|^2 - l^2, l(-d) = 0.

    With m = inf U'/U this is a lower bound for q_k, with m = sup U'/U an
    upper bound.  ``k`` may be a wavevector or its modulus.
    """
    kabs = math.hypot(*k) if np.ndim(k) else abs(float(k))
    if kabs == 0:
        raise ParameterError("bounds need |k| > 0")
    ksq = kabs * kabs
    s = math.sqrt(m * m + ksq)

    def l(x3):
        th = np.tanh((np.asarray(x3, dtype=float) + d) * s)
        return ksq * th / (s - m * th)

    return l


@dataclass(frozen=True)
class RiccatiSolution:
    """q_k sampled on ascending nodes spanning [-d, 0].

    ``integral[i]`` is the integral of q from -d to ``nodes[i]``.
    """

    k: tuple
    nodes: np.ndarray
    q: np.ndarray
    integral: np.ndarray
    error_estimate: float
    nsteps: int
    tol: float
    profile: object = field(repr=False, compare=False)

    @property
    def ksq(self):
        return self.k[0] ** 2 + self.k[1] ** 2

    @property
    def q_surface(self):
        return float(self.q[-1])

    @property
    def dq(self):
        """q' at the nodes, from the Riccati right-hand side."""
        return riccati_rhs(self.profile, self.ksq, self.nodes, self.q)

    def __call__(self, x3):
        return self._spline(x3)

    @property
    def _spline(self):
        sp = self.__dict__.get("_sp")
        if sp is None:
            sp = CubicHermiteSpline(self.nodes, self.q, self.dq)
            object.__setattr__(self, "_sp", sp)
        return sp

    def integral_from_surface(self):
        """Integral of q from 0 to each node (non-positive)."""
        return self.integral - self.integral[-1]


_cache = {}
_cache_lock = threading.Lock()


def clear_cache():
    with _cache_lock:
        _cache.clear()


def solve_riccati(profile, k, tol=DEFAULT_TOL, nodes=None, check_bounds=True):
    """Integrate the Riccati problem for wavevector ``k``.

    ``nodes`` are output abscissae inside [-d, 0]; both endpoints are always
    included.  Results are memoised by (profile, |k|^2, tol, nodes) since q
    depends on k only through |k|^2.
    """
    k1, k2, ksq = _norm_k(k)
    if ksq == 0.0:
        raise ParameterError("solve_riccati needs |k| > 0")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    d = profile.depth
    if nodes is None:
        nodes = chebyshev_nodes(d, 65)
    nodes = np.asarray(nodes, dtype=float)
    if np.any(nodes < -d - 1e-12 * d) or np.any(nodes > 1e-12 * d):
        raise ParameterError("nodes must lie in [-d, 0]")
    full = np.unique(np.concatenate([[-d], np.clip(nodes, -d, 0.0), [0.0]]))
    key = (profile.key, ksq, tol, full.tobytes(), check_bounds)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        q, integral, err, nsteps = hit
    else:
        require_zero_free(profile)
        breaks, cU, cdU = profile.ppoly()
        q, integral, status, nsteps, err = _kernels.integrate(
            breaks, cU, cdU, ksq, full, tol, tol * 1e-3, MAX_STEPS)
        if status != 0:
            raise IntegrationFailure(
                f"Riccati integration for |k|^2={ksq:g} failed: {_kernels.STATUS_TEXT.get(status, status)}")
        if check_bounds:
            _check_envelope(profile, math.sqrt(ksq), full, q, tol)
        with _cache_lock:
            _cache[key] = (q, integral, err, nsteps)
    return RiccatiSolution((k1, k2), full, q, integral, float(err), int(nsteps), tol, profile)


def envelope(profile, k, nodes):
    m_inf, m_sup = logderiv_extrema(profile)
    d = profile.depth
    kabs = math.hypot(*k) if np.ndim(k) else float(k)
    return riccati_bounds(kabs, m_inf, d)(nodes), riccati_bounds(kabs, m_sup, d)(nodes)


def _check_envelope(profile, kabs, nodes, q, tol):
    lo, hi = envelope(profile, kabs, nodes)
    slack = 10.0 * tol * np.maximum(np.abs(hi), 1.0) + ENVELOPE_FLOOR
    bad = (q < lo - slack) | (q > hi + slack)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise BoundViolation(
            f"q left the tanh envelope at x3={nodes[i]:.6g}: {lo[i]:.12g} <= {q[i]:.12g} <= {hi[i]:.12g} fails")


@dataclass(frozen=True)
class PressureProfile:
    """Q_k on the solution nodes; Q' = q Q."""

    k: tuple
    nodes: np.ndarray
    values: np.ndarray
    q: np.ndarray

    @property
    def surface_value(self):
        return float(self.values[-1])

    @property
    def derivative(self):
        return self.q * self.values

    def __call__(self, x3):
        sp = self.__dict__.get("_sp")
        if sp is None:
            sp = CubicHermiteSpline(self.nodes, self.values, self.derivative)
            object.__setattr__(self, "_sp", sp)
        return sp(x3)


def pressure_profile(sol, U0=None):
    """Q_k(x3) = k1^2 U(0)^2 / q_k(0) * exp(int_0^x3 q_k)."""
    k1 = sol.k[0]
    if k1 == 0.0:
        raise ZeroFirstComponent("Q_k vanishes identically when k1 = 0")
    if U0 is None:
        U0 = sol.profile.surface_value
    amp = k1 * k1 * U0 * U0 / sol.q_surface
    values = amp * np.exp(sol.integral_from_surface())
    return PressureProfile(sol.k, sol.nodes, values, sol.q)
