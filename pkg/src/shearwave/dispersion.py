"""Dispersion relation, the resonant set N(U) and sigma calibration.

A lattice wavevector k is resonant when

    q_k(0) = k1^2 U(0)^2 / D(|k|^2),       D = g + sigma |k|^2 by default.

The residual q_k(0) - k1^2 U(0)^2 / D is positive when q is too large for
resonance.  Since the dual lattice is discrete, resonance is produced by
inverting the relation for sigma at a chosen mode, never by root-finding
in k.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import IntegrationFailure, NotCapillary, ParameterError, ZeroFirstComponent
from .profiles import logderiv_extrema, require_zero_free
from .riccati import DEFAULT_TOL, MAX_STEPS, PressureProfile, RiccatiSolution, pressure_profile, riccati_bounds, solve_riccati

MEMBERSHIP_TOL = 1e-8


def worker_count():
    env = os.environ.get("SHEARWAVE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"SHEARWAVE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def dispersion_rhs(profile, params, k):
    k1, k2 = float(k[0]), float(k[1])
    return k1 * k1 * profile.surface_value ** 2 / params.symbol(k1 * k1 + k2 * k2)


def dispersion_residual(profile, params, k, tol=DEFAULT_TOL, nodes=None):
    """q_k(0) - k1^2 U(0)^2 / D(|k|^2)."""
    if float(k[0]) == 0.0:
        raise ZeroFirstComponent("the dispersion relation has no solutions with k1 = 0")
    sol = solve_riccati(profile, k, tol=tol, nodes=nodes)
    return sol.q_surface - dispersion_rhs(profile, params, k)


def _sup_tail(params, r):
    """sup_{s >= r} s^2 / D(s^2), the worst case of k1^2/D over |k| >= r."""
    if params.capillary:
        return 1.0 / params.sigma
    s = r * np.geomspace(1.0, 1e6, 400)
    vals = s * s / np.asarray([params.symbol(v * v) for v in s], dtype=float)
    return float(vals.max())


def kernel_cutoff_radius(profile, params, lattice=None):
    """Radius beyond which no wavevector can be resonant.

    For |k| > R the tanh lower bound alone already exceeds the largest
    possible right-hand side, so q_k(0) - rhs > 0.  Obtained from the
    explicit bound, never from solving for q.  ``lattice`` is accepted for
    interface symmetry; the bound does not depend on it.
    """
    require_zero_free(profile)
    m_inf, _ = logderiv_extrema(profile)
    d = profile.depth
    U0sq = profile.surface_value ** 2

    def gap(r):
        return float(riccati_bounds(r, m_inf, d)(0.0)) - U0sq * _sup_tail(params, r)

    lo = 1e-8
    if gap(lo) > 0:
        return lo
    hi = 1.0
    while gap(hi) <= 0:
        hi *= 2.0
        if hi > 1e8:
            raise ParameterError("no finite cutoff: the dynamic symbol grows too slowly for finitely many resonances")
    return brentq(gap, lo if hi == 1.0 else hi / 2.0, hi, xtol=1e-13, rtol=1e-14)


@dataclass(frozen=True)
class ResonantMode:
    index: tuple
    k: tuple
    q_surface: float
    residual: float
    solution: RiccatiSolution = field(repr=False)
    Q: PressureProfile = field(repr=False)

    @property
    def kabs(self):
        return math.hypot(*self.k)


@dataclass(frozen=True)
class ResonantSet:
    modes: tuple
    cutoff_radius: float
    membership_tol: float
    lattice: object = field(repr=False)

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def indices(self):
        return [m.index for m in self.modes]

    def get(self, index):
        for m in self.modes:
            if m.index == tuple(index):
                return m
        return None

    def __contains__(self, index):
        return self.get(index) is not None

    def positive(self):
        """Modes with k1 > 0 and k2 > 0."""
        return [m for m in self.modes if m.index[0] > 0 and m.index[1] > 0]

    def axis(self):
        """Modes with k1 > 0 and k2 = 0."""
        return [m for m in self.modes if m.index[0] > 0 and m.index[1] == 0]

    def representatives(self):
        return [m for m in self.modes if m.index[0] > 0 and m.index[1] >= 0]

    def to_dict(self):
        return {
            "cutoff_radius": self.cutoff_radius,
            "membership_tol": self.membership_tol,
            "modes": [{"index": list(m.index), "k": list(m.k), "q0": m.q_surface, "residual": m.residual}
                      for m in self.modes],
        }


def lattice_representatives(lattice, radius):
    """Lattice indices (i > 0, j >= 0) with 0 < |k| <= radius."""
    out = []
    k1, k2 = lattice.kappa1, lattice.kappa2
    imax = int(math.floor(radius / k1 + 1e-12))
    for i in range(1, imax + 1):
        rest = radius * radius - (i * k1) ** 2
        jmax = int(math.floor(math.sqrt(max(rest, 0.0)) / k2 + 1e-12))
        for j in range(0, jmax + 1):
            if (i * k1) ** 2 + (j * k2) ** 2 <= radius * radius * (1 + 1e-14):
                out.append((i, j))
    return out


def surface_values(profile, ksq_list, tol=DEFAULT_TOL):
    """q(0) for many |k|^2 at once, split across worker threads."""
    require_zero_free(profile)
    ksq = np.asarray(ksq_list, dtype=float)
    if ksq.size == 0:
        return ksq.copy()
    breaks, cU, cdU = profile.ppoly()
    d = profile.depth

    def run(chunk):
        return _kernels.surface_many(breaks, cU, cdU, chunk, -d, 0.0, tol, tol * 1e-3, MAX_STEPS)

    nw = min(worker_count(), ksq.size)
    if nw <= 1:
        parts = [run(ksq)]
    else:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(run, np.array_split(ksq, nw)))
    q0 = np.concatenate([p[0] for p in parts])
    st = np.concatenate([p[1] for p in parts])
    if np.any(st != 0):
        bad = int(np.argmax(st != 0))
        raise IntegrationFailure(f"Riccati integration failed at |k|^2={ksq[bad]:g}")
    return q0


def scan(profile, params, lattice, radius=None, tol=DEFAULT_TOL):
    """Dispersion data for every representative lattice mode within ``radius``.

    Returns a list of dicts with keys i, j, k1, k2, kabs, q0, rhs, residual,
    ordered by (|k|, k1, k2).
    """
    if radius is None:
        radius = kernel_cutoff_radius(profile, params, lattice)
    idx = lattice_representatives(lattice, radius)
    ks = [lattice.k(i, j) for i, j in idx]
    q0 = surface_values(profile, [a * a + b * b for a, b in ks], tol=tol)
    rows = []
    for (i, j), (a, b), q in zip(idx, ks, q0):
        rhs = dispersion_rhs(profile, params, (a, b))
        rows.append({"i": i, "j": j, "k1": a, "k2": b, "kabs": math.hypot(a, b),
                     "q0": float(q), "rhs": float(rhs), "residual": float(q - rhs)})
    rows.sort(key=lambda r: (r["kabs"], r["k1"], r["k2"]))
    return rows


def _signed_copies(i, j):
    out = []
    for si in (1, -1):
        for sj in ((1, -1) if j else (1,)):
            out.append((si * i, sj * j))
    return out


def find_kernel_set(profile, params, lattice, membership_tol=MEMBERSHIP_TOL, tol=DEFAULT_TOL, nodes=None):
    """Enumerate N(U): all lattice k != 0 with |residual| <= membership_tol.

    The result is closed under sign flips of either component and sorted
    lexicographically by (|k|, k1, k2).  An empty set is a normal outcome.
    """
    radius = kernel_cutoff_radius(profile, params, lattice)
    rows = scan(profile, params, lattice, radius, tol=tol)
    modes = []
    for row in rows:
        # screen with the batched surface solve, confirm on the full node set
        if abs(row["residual"]) > max(100.0 * membership_tol, 1e-6):
            continue
        i, j = row["i"], row["j"]
        k = lattice.k(i, j)
        sol = solve_riccati(profile, k, tol=tol, nodes=nodes)
        res = sol.q_surface - dispersion_rhs(profile, params, k)
        if abs(res) > membership_tol:
            continue
        for si, sj in _signed_copies(i, j):
            ks = lattice.k(si, sj)
            s = solve_riccati(profile, ks, tol=tol, nodes=nodes)
            modes.append(ResonantMode((si, sj), ks, s.q_surface, res, s, pressure_profile(s)))
    modes.sort(key=lambda m: (m.kabs, m.k[0], m.k[1]))
    return ResonantSet(tuple(modes), radius, membership_tol, lattice)


def calibrate_sigma(profile, g, lattice, target, tol=DEFAULT_TOL):
    """Surface tension making the lattice mode ``target = (i, j)`` resonant.

    sigma = (k1^2 U(0)^2 / q_k(0) - g) / |k|^2.
    """
    i, j = int(target[0]), int(target[1])
    if i == 0:
        raise ZeroFirstComponent("cannot calibrate a mode with k1 = 0")
    k1, k2 = lattice.k(i, j)
    sol = solve_riccati(profile, (k1, k2), tol=tol)
    num = k1 * k1 * profile.surface_value ** 2 / sol.q_surface - g
    if num <= 0:
        raise NotCapillary(
            f"calibration needs k1^2 U(0)^2 / q_k(0) > g, got {num + g:.6g} <= {g:.6g}; lower g or speed up the flow")
    return num / (k1 * k1 + k2 * k2)


def monotonicity_scan(profile, params, k1, k2_list, tol=DEFAULT_TOL):
    """q_k(0) along k = (k1, k2) for each k2 in ``k2_list``."""
    if float(k1) == 0.0:
        raise ZeroFirstComponent("monotonicity scan needs k1 != 0")
    return [solve_riccati(profile, (k1, k2), tol=tol).q_surface for k2 in k2_list]
