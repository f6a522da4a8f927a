"""Quadratic-order solvability: averaged bilinears, the obstruction f, the verdict.

At second order the x1-average of the curl of the momentum equation must
vanish.  For the rotational part v of a kernel element this reads

    < (d2^2 - d3^2)(v2 v3) + d2 d3 (v3^2 - v2^2) > = 0,

and with the Riccati equation it collapses to

    -8 (U'/U^3) sum_{k in N+} a_k^2 (k2/k1^2) Q^2 (k1^2 - k2^2 + q^2) sin(2 k2 x2).

Both sides are computed independently here.  The grid path never
differentiates sampled data in x3: every vertical profile is carried as an
exact jet (value, first and second derivative) built from the ODEs that q and
Q satisfy, so the comparison tests the algebra and not a stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import MEMBERSHIP_TOL, find_kernel_set
from .errors import NonResonantMode
from .fields import KernelModeSet, trig_factor
from .profiles import require_zero_free
from .riccati import DEFAULT_TOL, chebyshev_nodes, pressure_profile, solve_riccati
from .spectral import COS, SIN, TrigField, VerticalGrid, horizontal_nodes, synthesize, x2_derivative

UNIFORM_FLOW = "UNIFORM_FLOW"
KERNEL_2D_ONLY = "KERNEL_2D_ONLY"
OBSTRUCTED_3D = "OBSTRUCTED_3D"
INCONCLUSIVE = "INCONCLUSIVE"

POSITIVITY_THRESHOLD = 0.01
F_NODES = 129


# jets ---------------------------------------------------------------------

def _jmul(a, b):
    return (a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2])


@dataclass
class ModeJets:
    """Exact x3-jets of q, Q and 1/U for one representative mode."""

    index: tuple
    k: tuple
    amplitude: float
    q: tuple
    Q: tuple


def _profile_jets(profile, z):
    U, dU, ddU = profile(z), profile.d1(z), profile.d2(z)
    r = dU / U
    dr = ddU / U - r * r
    g = 1.0 / U
    dg = -r * g
    ddg = -(dr * g + r * dg)
    return r, dr, (g, dg, ddg)


def mode_jets(profile, lattice, amplitudes, nodes, tol=DEFAULT_TOL):
    """Jets on ``nodes`` for every nonzero representative amplitude."""
    r, dr, _ = _profile_jets(profile, nodes)
    out = []
    for (i, j), a in sorted(amplitudes.nonzero().items()):
        if i == 0:
            raise NonResonantMode("k1 = 0 modes carry no pressure")
        k = lattice.k(i, j)
        sol = solve_riccati(profile, k, tol=tol, nodes=nodes)
        q = sol.q
        ksq = k[0] ** 2 + k[1] ** 2
        q1 = 2.0 * r * q + ksq - q * q
        q2 = 2.0 * (dr * q + r * q1) - 2.0 * q * q1
        Q = pressure_profile(sol).values
        Qj = (Q, q * Q, (q1 + q * q) * Q)
        out.append(ModeJets((i, j), k, a, (q, q1, q2), Qj))
    return out


def _v23_jets(profile, lattice, vgrid, jets):
    """Trig coefficients of (v2, v3) and of their first two x3-derivatives."""
    _, _, gj = _profile_jets(profile, vgrid.nodes)
    m1 = max([m.index[0] for m in jets] + [0]) + 1
    m2 = max([m.index[1] for m in jets] + [0]) + 1
    c2 = np.zeros((3, m1, m2, vgrid.n))
    c3 = np.zeros((3, m1, m2, vgrid.n))
    for m in jets:
        i, j = m.index
        k1, k2 = m.k
        E = m.amplitude * trig_factor(i, j)
        Qg = _jmul(m.Q, gj)
        Qqg = _jmul(Qg, m.q)
        for o in range(3):
            c2[o, i, j] += E * k2 / k1 * Qg[o]
            c3[o, i, j] -= E / k1 * Qqg[o]
    f2 = [TrigField(lattice, vgrid, c2[o], (SIN, SIN)) for o in range(3)]
    f3 = [TrigField(lattice, vgrid, c3[o], (SIN, COS)) for o in range(3)]
    return f2, f3


def default_grid(amplitudes, n1=None, n2=None):
    """Horizontal sizes resolving all quadratic products without aliasing."""
    modes = amplitudes.nonzero()
    m1 = max([i for i, _ in modes] + [0])
    m2 = max([j for _, j in modes] + [0])
    n1 = n1 or max(8, 4 * m1 + 4)
    n2 = n2 or max(8, 4 * m2 + 4)
    return n1 + n1 % 2, n2 + n2 % 2


def _representatives_3d(jets):
    return [m for m in jets if m.index[0] > 0 and m.index[1] > 0]


def _sin2(lattice, x2, m):
    return np.sin(2.0 * m.k[1] * x2)[:, None]


@dataclass
class AveragedBilinears:
    """x1-averages on the (x2, x3) grid: numerical and closed form."""

    x2: np.ndarray
    x3: np.ndarray
    grid: dict
    closed: dict

    def max_error(self):
        return {key: float(np.abs(self.grid[key] - self.closed[key]).max()) for key in self.grid}


def _setup(profile, lattice, amplitudes, vgrid, n1, n2, tol):
    if vgrid is None:
        vgrid = VerticalGrid.chebyshev(profile.depth, 33)
    n1, n2 = default_grid(amplitudes, n1, n2)
    jets = mode_jets(profile, lattice, amplitudes, vgrid.nodes, tol)
    f2, f3 = _v23_jets(profile, lattice, vgrid, jets)
    V2 = [synthesize(f, n1, n2).values for f in f2]
    V3 = [synthesize(f, n1, n2).values for f in f3]
    _, x2 = horizontal_nodes(lattice, n1, n2)
    return vgrid, jets, V2, V3, x2


def averaged_bilinears(profile, lattice, amplitudes, vgrid=None, n1=None, n2=None, tol=DEFAULT_TOL):
    """<v2 v3>, d2<v3^2> and d2<v2^2> from grid products and from closed forms.

    Closed forms (sums over N+, i.e. k1 > 0 and k2 > 0):

        <v2 v3>   = -4 sum a^2 k2 Q^2 q   / (k1^2 U^2) sin(2 k2 x2)
        d2<v3^2>  = -8 sum a^2 k2 Q^2 q^2 / (k1^2 U^2) sin(2 k2 x2)
        d2<v2^2>  =  8 sum a^2 k2^3 Q^2   / (k1^2 U^2) sin(2 k2 x2)
    """
    vgrid, jets, V2, V3, x2 = _setup(profile, lattice, amplitudes, vgrid, n1, n2, tol)
    P = (V2[0] * V3[0]).mean(axis=0)
    grid = {
        "v2v3": P,
        "d2_v3sq": x2_derivative((V3[0] ** 2).mean(axis=0), lattice),
        "d2_v2sq": x2_derivative((V2[0] ** 2).mean(axis=0), lattice),
    }
    U = profile(vgrid.nodes)
    closed = {key: np.zeros_like(P) for key in grid}
    for m in _representatives_3d(jets):
        k1, k2 = m.k
        Q, q = m.Q[0], m.q[0]
        w = m.amplitude ** 2 * k2 * Q * Q / (k1 * k1 * U * U)
        s = _sin2(lattice, x2, m)
        closed["v2v3"] += -4.0 * s * (w * q)
        closed["d2_v3sq"] += -8.0 * s * (w * q * q)
        closed["d2_v2sq"] += 8.0 * s * (w * k2 * k2)
    return AveragedBilinears(x2, vgrid.nodes, grid, closed)


@dataclass
class SolvabilityResult:
    x2: np.ndarray
    x3: np.ndarray
    numeric: np.ndarray
    closed: np.ndarray

    @property
    def abs_error(self):
        return float(np.abs(self.numeric - self.closed).max())

    @property
    def rel_error(self):
        scale = float(np.abs(self.closed).max())
        return self.abs_error / scale if scale > 0 else float("inf") if self.abs_error > 0 else 0.0

    @property
    def max_abs(self):
        return max(float(np.abs(self.numeric).max()), float(np.abs(self.closed).max()))


def solvability_average(profile, lattice, amplitudes, vgrid=None, n1=None, n2=None, tol=DEFAULT_TOL):
    """Left side of the second-order solvability condition, two ways.

    ``numeric`` forms the products on the grid, averages over x1 and takes
    x2-derivatives spectrally and x3-derivatives by the product rule on exact
    jets.  ``closed`` is the reduced single sum.
    """
    vgrid, jets, V2, V3, x2 = _setup(profile, lattice, amplitudes, vgrid, n1, n2, tol)
    a, b = V2, V3
    P = (a[0] * b[0]).mean(axis=0)
    P33 = (a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2]).mean(axis=0)
    T3 = (2.0 * (b[0] * b[1] - a[0] * a[1])).mean(axis=0)
    numeric = x2_derivative(P, lattice, 2) - P33 + x2_derivative(T3, lattice, 1)

    z = vgrid.nodes
    U, dU = profile(z), profile.d1(z)
    closed = np.zeros_like(numeric)
    for m in _representatives_3d(jets):
        k1, k2 = m.k
        Q, q = m.Q[0], m.q[0]
        prof = -8.0 * dU / U ** 3 * m.amplitude ** 2 * (k2 / k1 ** 2) * Q * Q * (k1 * k1 - k2 * k2 + q * q)
        closed += _sin2(lattice, x2, m) * prof
    return SolvabilityResult(x2, z, numeric, closed)


# the obstruction function ------------------------------------------------------

@dataclass
class ObstructionProfile:
    """f, its analytic derivative and U'f on shared nodes."""

    nodes: np.ndarray
    f: np.ndarray
    df: np.ndarray
    Uprime_f: np.ndarray
    contributions: dict = field(default_factory=dict)
    dcontributions: dict = field(default_factory=dict)

    @property
    def has_3d(self):
        return bool(self.contributions)

    def positivity_delta(self):
        """Largest delta with f' > 0 at every node in (-d, -d + delta]; 0 if none."""
        x, df = self.nodes, self.df
        d = -x[0]
        delta = 0.0
        for xi, v in zip(x[1:], df[1:]):
            if v > 0:
                delta = xi + d
            else:
                break
        return float(delta)

    def fd_check(self):
        """Max relative gap between f' and a spectral derivative of f away from the ends."""
        vg = VerticalGrid(float(-self.nodes[0]), self.nodes, "chebyshev")
        num = vg.diff(self.f)
        inner = slice(2, -2)
        scale = max(float(np.abs(self.df).max()), 1e-300)
        return float(np.abs(num[inner] - self.df[inner]).max() / scale)

    def to_dict(self):
        return {
            "max_abs_f": float(np.abs(self.f).max()),
            "max_abs_Uprime_f": float(np.abs(self.Uprime_f).max()),
            "positivity_delta": self.positivity_delta(),
            "contributions": {f"{i},{j}": float(np.abs(c).max())
                              for (i, j), c in sorted(self.contributions.items())},
        }


def obstruction_f(profile, resonant, amplitudes, nodes=None, tol=DEFAULT_TOL):
    """f = sum_{k in N+} a^2 (k2^2/k1^2) Q^2 (k1^2 - k2^2 + q^2).

    f' = 4 sum a^2 (k2^2/k1^2) Q^2 q (k1^2 + (U'/U) q).  ``resonant`` may be a
    ResonantSet, used to check the amplitudes, or a bare lattice.
    """
    if nodes is None:
        nodes = chebyshev_nodes(profile.depth, F_NODES)
    nodes = np.asarray(nodes, dtype=float)
    lattice = getattr(resonant, "lattice", resonant)
    is_set = hasattr(resonant, "modes")
    r = profile.logderiv(nodes)
    f = np.zeros_like(nodes)
    df = np.zeros_like(nodes)
    contrib, dcontrib = {}, {}
    for (i, j), a in sorted(amplitudes.nonzero().items()):
        if is_set and (i, j) not in resonant:
            raise NonResonantMode(f"mode {(i, j)} is not in N(U); its amplitude must vanish")
        if i == 0 or j == 0:
            continue
        k1, k2 = lattice.k(i, j)
        sol = solve_riccati(profile, (k1, k2), tol=tol, nodes=nodes)
        Q = pressure_profile(sol).values
        q = sol.q
        w = a * a * (k2 * k2) / (k1 * k1) * Q * Q
        c = w * (k1 * k1 - k2 * k2 + q * q)
        dc = 4.0 * w * q * (k1 * k1 + r * q)
        contrib[(i, j)] = c
        dcontrib[(i, j)] = dc
        f += c
        df += dc
    return ObstructionProfile(nodes, f, df, profile.d1(nodes) * f, contrib, dcontrib)


# verdict ------------------------------------------------------------------

@dataclass
class Verdict:
    classification: str
    max_abs_Uprime: float
    max_abs_f: float
    max_abs_Uprime_f: float
    ratio: float
    positivity_delta: float
    threshold: float
    resonant: object = field(repr=False)
    profile_f: ObstructionProfile = field(repr=False)
    reasons: list = field(default_factory=list)

    def to_dict(self):
        out = {
            "classification": self.classification,
            "max_abs_Uprime": self.max_abs_Uprime,
            "max_abs_f": self.max_abs_f,
            "max_abs_Uprime_f": self.max_abs_Uprime_f,
            "ratio": self.ratio,
            "threshold": self.threshold,
            "positivity_delta": self.positivity_delta,
            "reasons": list(self.reasons),
            "resonant_set": self.resonant.to_dict() if self.resonant is not None else None,
        }
        out.update(contributions=self.profile_f.to_dict()["contributions"])
        return out


def theorem_verdict(profile, params, lattice, amplitudes=None, membership_tol=MEMBERSHIP_TOL,
                    tol=DEFAULT_TOL, uniform_tol=1e-12, threshold=POSITIVITY_THRESHOLD, nodes=None):
    """Classify a configuration against the no-3D-bifurcation statement.

    With ``amplitudes=None`` every resonant representative gets amplitude 1.
    """
    report = require_zero_free(profile)
    resonant = find_kernel_set(profile, params, lattice, membership_tol=membership_tol, tol=tol)
    if amplitudes is None:
        amplitudes = KernelModeSet(0.0, {m.index: 1.0 for m in resonant.representatives()})
    for idx in amplitudes.nonzero():
        if idx not in resonant:
            raise NonResonantMode(f"mode {idx} is not in N(U); its amplitude must vanish")
    prof = obstruction_f(profile, resonant, amplitudes, nodes=nodes, tol=tol)
    max_du = float(np.abs(profile.d1(prof.nodes)).max())
    max_f = float(np.abs(prof.f).max())
    max_uf = float(np.abs(prof.Uprime_f).max())
    ratio = max_uf / (max_du * max_f) if max_du > 0 and max_f > 0 else 0.0
    delta = prof.positivity_delta() if prof.has_3d else 0.0
    reasons = []
    if report.constant or max_du <= uniform_tol * max(report.max_abs, 1.0):
        cls = UNIFORM_FLOW
        reasons.append("U' vanishes: the second-order condition is void and 3D kernels are admissible")
    elif not prof.has_3d:
        cls = KERNEL_2D_ONLY
        reasons.append("no amplitude on a mode with k1 > 0 and k2 > 0")
    elif ratio > threshold and delta > 0:
        cls = OBSTRUCTED_3D
        reasons.append(f"max|U'f| / (max|U'| max|f|) = {ratio:.6g} exceeds {threshold}")
        reasons.append(f"f' > 0 on (-d, -d + {delta:.6g}]")
    else:
        cls = INCONCLUSIVE
        reasons.append(f"ratio {ratio:.3g} or positivity interval {delta:.3g} below the threshold")
    return Verdict(cls, max_du, max_f, max_uf, ratio, delta, threshold, resonant, prof, reasons)
