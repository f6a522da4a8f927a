"""Shear profiles U(x3) on [-d, 0], wave parameters and the horizontal lattice.

A profile is either a polynomial in x3 (coefficients in ascending powers) or a
cubic spline through tabulated samples.  Both are exported to the compiled
Riccati kernel as a piecewise polynomial in local coordinates, so the kernel
never needs to know which representation it is integrating against.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import ParameterError, ProfileError

SCAN_POINTS = 1024


class ShearProfile:
    """Background velocity U(x3) on [-depth, 0].

    Use :meth:`poly`, :meth:`samples` or :meth:`constant` to build one.
    Instances are immutable; every evaluation method is vectorised.
    """

    def __init__(self, kind, depth, *, coeffs=None, x3=None, values=None):
        depth = float(depth)
        if not depth > 0 or not math.isfinite(depth):
            raise ProfileError(f"depth must be positive, got {depth}")
        self.kind = kind
        self.depth = depth
        self._memo = {}
        if kind == "poly":
            c = np.atleast_1d(np.asarray(coeffs, dtype=float))
            if c.size == 0 or not np.all(np.isfinite(c)):
                raise ProfileError("polynomial coefficients must be finite and non-empty")
            self.coeffs = c
            self._p = Polynomial(c)
            self._dp = self._p.deriv(1)
            self._ddp = self._p.deriv(2)
        elif kind == "samples":
            x = np.asarray(x3, dtype=float)
            u = np.asarray(values, dtype=float)
            if x.ndim != 1 or x.shape != u.shape:
                raise ProfileError("samples need matching one-dimensional x3 and U arrays")
            if x.size < 4:
                raise ProfileError(f"sampled profiles need at least 4 nodes, got {x.size}")
            if np.any(np.diff(x) <= 0):
                raise ProfileError("sample nodes must be strictly increasing")
            if not (math.isclose(x[0], -depth, abs_tol=1e-12 * depth) and abs(x[-1]) <= 1e-12 * depth):
                raise ProfileError("sample nodes must span exactly [-depth, 0]")
            self.x3 = x
            self.values = u
            self._p = CubicSpline(x, u)
            self._dp = self._p.derivative(1)
            self._ddp = self._p.derivative(2)
        else:
            raise ProfileError(f"unknown profile kind {kind!r}")

    # construction -------------------------------------------------------
    @classmethod
    def poly(cls, coeffs, depth):
        """U(x3) = sum_n coeffs[n] * x3**n."""
        return cls("poly", depth, coeffs=coeffs)

    @classmethod
    def constant(cls, value, depth):
        return cls("poly", depth, coeffs=[value])

    @classmethod
    def samples(cls, x3, values):
        x3 = np.asarray(x3, dtype=float)
        if x3.size == 0:
            raise ProfileError("sampled profiles need at least 4 nodes, got 0")
        return cls("samples", -x3[0], x3=x3, values=values)

    @classmethod
    def from_dict(cls, block):
        kind = block.get("type")
        if kind == "poly":
            return cls.poly(block["coeffs"], block["depth"])
        if kind == "samples":
            return cls.samples(block["x3"], block["U"])
        raise ProfileError(f"unknown profile type {kind!r}")

    def to_dict(self):
        if self.kind == "poly":
            return {"type": "poly", "coeffs": [float(c) for c in self.coeffs], "depth": self.depth}
        return {"type": "samples", "x3": self.x3.tolist(), "U": self.values.tolist()}

    def scaled(self, c):
        """Profile c*U with the same representation."""
        if self.kind == "poly":
            return ShearProfile.poly(c * self.coeffs, self.depth)
        return ShearProfile.samples(self.x3, c * self.values)

    # evaluation ---------------------------------------------------------
    def __call__(self, x3):
        return self._p(x3)

    def d1(self, x3):
        return self._dp(x3)

    def d2(self, x3):
        return self._ddp(x3)

    def logderiv(self, x3):
        """U'/U."""
        return self._dp(x3) / self._p(x3)

    @property
    def surface_value(self):
        return float(self._p(0.0))

    @property
    def key(self):
        """Stable content hash, used for memoising Riccati solves."""
        h = hashlib.sha256()
        h.update(self.kind.encode())
        h.update(np.float64(self.depth).tobytes())
        if self.kind == "poly":
            h.update(self.coeffs.tobytes())
        else:
            h.update(self.x3.tobytes())
            h.update(self.values.tobytes())
        return h.hexdigest()

    def ppoly(self):
        """(breaks, cU, cdU) in scipy PPoly layout: descending local powers.

        Piece i covers [breaks[i], breaks[i+1]] and is evaluated in
        ``x - breaks[i]``.  ``cdU`` is padded to the row count of ``cU``.
        """
        if self.kind == "poly":
            local = self._p(Polynomial([-self.depth, 1.0]))
            c = local.coef[::-1].reshape(-1, 1)
            dc = local.deriv(1).coef[::-1].reshape(-1, 1)
            breaks = np.array([-self.depth, 0.0])
        else:
            c = self._p.c
            dc = self._dp.c
            breaks = self._p.x
        dcp = np.zeros_like(c)
        dcp[c.shape[0] - dc.shape[0]:] = dc
        return (np.ascontiguousarray(breaks, dtype=float),
                np.ascontiguousarray(c, dtype=float),
                np.ascontiguousarray(dcp, dtype=float))

    def __repr__(self):
        if self.kind == "poly":
            return f"ShearProfile.poly({self.coeffs.tolist()}, depth={self.depth})"
        return f"ShearProfile.samples(<{self.x3.size} nodes>, depth={self.depth})"


@dataclass(frozen=True)
class ValidationReport:
    zero_free: bool
    min_abs: float
    max_abs: float
    max_abs_derivative: float
    constant: bool
    zero_location: Optional[float] = None

    def to_dict(self):
        return dict(self.__dict__)


def validate_profile(profile, resolution=SCAN_POINTS, constant_tol=1e-12):
    """Check that U has no zeros on [-d, 0] and whether it is constant.

    The scan is sign constancy over ``resolution`` equispaced nodes followed
    by a bounded local minimisation of |U| around the smallest sample.  This
    is a numerical check, not a root count.
    """
    if resolution < 16:
        raise ParameterError(f"resolution must be at least 16, got {resolution}")
    d = profile.depth
    x = np.linspace(-d, 0.0, int(resolution))
    u = profile(x)
    du = profile.d1(x)
    absu = np.abs(u)
    max_abs = float(absu.max())
    max_du = float(np.abs(du).max())
    scale = max(max_abs, 1e-300)
    constant = max_du * d <= constant_tol * scale

    sign_change = np.nonzero(np.signbit(u[:-1]) != np.signbit(u[1:]))[0]
    if sign_change.size or np.any(u == 0.0):
        if np.any(u == 0.0):
            loc = float(x[np.argmax(u == 0.0)])
        else:
            i = int(sign_change[0])
            loc = _bisect(profile, x[i], x[i + 1])
        return ValidationReport(False, 0.0, max_abs, max_du, constant, loc)

    i = int(np.argmin(absu))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    res = minimize_scalar(lambda s: abs(float(profile(s))), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * d})
    min_abs = min(float(absu[i]), float(res.fun))
    if min_abs <= 1e-14 * scale:
        return ValidationReport(False, min_abs, max_abs, max_du, constant, float(res.x))
    return ValidationReport(True, min_abs, max_abs, max_du, constant)


def _bisect(profile, a, b):
    fa = float(profile(a))
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = float(profile(m))
        if fm == 0.0 or b - a < 1e-15:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def require_zero_free(profile):
    report = profile._memo.get("validation")
    if report is None:
        report = profile._memo["validation"] = validate_profile(profile)
    if not report.zero_free:
        raise ProfileError(f"U vanishes at x3 = {report.zero_location:.12g}; stagnant profiles are not supported")
    return report


def logderiv_extrema(profile, resolution=SCAN_POINTS):
    """Return (inf, sup) of U'/U over [-d, 0].

    Dense scan, then a bounded local refinement around each extreme sample.
    """
    hit = profile._memo.get(("extrema", resolution))
    if hit is not None:
        return hit
    d = profile.depth
    x = np.linspace(-d, 0.0, int(resolution))
    r = profile.logderiv(x)
    out = []
    for sign in (1.0, -1.0):
        i = int(np.argmin(sign * r))
        best = float(r[i])
        if 0 < i < x.size - 1:
            res = minimize_scalar(lambda s: sign * float(profile.logderiv(s)),
                                  bounds=(x[i - 1], x[i + 1]), method="bounded",
                                  options={"xatol": 1e-13 * d})
            cand = sign * float(res.fun)
            best = min(best, cand) if sign > 0 else max(best, cand)
        out.append(best)
    m_inf, m_sup = out
    profile._memo[("extrema", resolution)] = (m_inf, m_sup)
    return m_inf, m_sup


@dataclass(frozen=True)
class LatticeSpec:
    """Horizontal periods; wavenumbers are always derived, never stored."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be positive, got {v}")

    @property
    def kappa1(self):
        return 2.0 * math.pi / self.lambda1

    @property
    def kappa2(self):
        return 2.0 * math.pi / self.lambda2

    def k(self, i, j):
        return (i * self.kappa1, j * self.kappa2)

    def to_dict(self):
        return {"lambda1": self.lambda1, "lambda2": self.lambda2}

    @classmethod
    def from_dict(cls, block):
        return cls(float(block["lambda1"]), float(block["lambda2"]))


@dataclass(frozen=True)
class WaveParams:
    """Gravity, surface tension and the dynamic boundary operator.

    With ``dynamic=None`` the surface operator is the capillary-gravity
    symbol D(|k|^2) = g + sigma*|k|^2.  Any other callable D(|k|^2) may be
    supplied (for instance a hydroelastic symbol); it must be positive.
    ``dynamic_spec`` is a serialisable description used by config files.
    """

    g: float
    sigma: Optional[float] = None
    dynamic: Optional[Callable[[float], float]] = field(default=None, compare=False)
    dynamic_spec: Optional[dict] = None

    def __post_init__(self):
        if not (self.g > 0 and math.isfinite(self.g)):
            raise ParameterError(f"g must be positive, got {self.g}")
        if self.dynamic is None:
            if self.sigma is None or not self.sigma > 0:
                raise ParameterError(f"sigma must be positive for the capillary-gravity condition, got {self.sigma}")

    @property
    def capillary(self):
        return self.dynamic is None

    def symbol(self, ksq):
        """D(|k|^2); replaces g + sigma*|k|^2 in the dispersion relation."""
        if self.dynamic is None:
            return self.g + self.sigma * ksq
        val = self.dynamic(ksq)
        if np.any(np.asarray(val) <= 0):
            raise ParameterError(f"dynamic symbol must be positive, got {val} at |k|^2={ksq}")
        return val

    def with_sigma(self, sigma):
        return WaveParams(self.g, sigma)

    def to_dict(self):
        if self.dynamic is None:
            return {"g": self.g, "sigma": self.sigma}
        return {"g": self.g, "sigma": self.sigma, "dynamic": self.dynamic_spec}

    @classmethod
    def polynomial_symbol(cls, g, coeffs):
        """D(|k|^2) = sum_n coeffs[n] |k|^(2n); coeffs[0] should equal g."""
        c = [float(v) for v in coeffs]
        p = Polynomial(c)
        return cls(g, c[1] if len(c) > 1 else None, dynamic=p,
                   dynamic_spec={"type": "poly_ksq", "coeffs": c})
