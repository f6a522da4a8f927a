"""Residuals of the flattened steady problem and of its linearisation.

Flattened system, with M = J/rho and dynamic pressure wp:

    M^T (u.grad)(M u) + grad wp = 0,   div u = 0   in the slab,
    u3 = 0 on x3 = -d and x3 = 0,
    wp - g eta + sigma div(grad eta / sqrt(1 + |grad eta|^2)) = 0 on x3 = 0.

All derivatives are taken exactly at collocation nodes: horizontal ones on
trigonometric coefficients, vertical ones by Chebyshev differentiation, and
the derivatives of M from the closed form of phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import FlowState, background_state, build_flattening
from .spectral import TrigField, synthesize


def _norms(a):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0, 0.0
    return float(np.abs(a).max()), float(np.sqrt(np.mean(a * a)))


@dataclass
class ResidualReport:
    """Max and root-mean-square norms of each equation's residual."""

    momentum_max: tuple
    momentum_l2: tuple
    divergence_max: float
    divergence_l2: float
    kinematic_top_max: float
    kinematic_top_l2: float
    kinematic_bottom_max: float
    kinematic_bottom_l2: float
    dynamic_max: float
    dynamic_l2: float
    per_mode: dict = field(default_factory=dict)
    kind: str = "nonlinear"

    @property
    def momentum(self):
        return max(self.momentum_max)

    @property
    def max_norm(self):
        return max(self.momentum, self.divergence_max, self.kinematic_top_max,
                   self.kinematic_bottom_max, self.dynamic_max)

    def norms(self):
        return {
            "momentum": self.momentum,
            "divergence": self.divergence_max,
            "kinematic_top": self.kinematic_top_max,
            "kinematic_bottom": self.kinematic_bottom_max,
            "dynamic": self.dynamic_max,
        }

    def to_dict(self):
        out = {
            "kind": self.kind,
            "momentum_max": list(self.momentum_max),
            "momentum_l2": list(self.momentum_l2),
            "divergence_max": self.divergence_max,
            "divergence_l2": self.divergence_l2,
            "kinematic_top_max": self.kinematic_top_max,
            "kinematic_top_l2": self.kinematic_top_l2,
            "kinematic_bottom_max": self.kinematic_bottom_max,
            "kinematic_bottom_l2": self.kinematic_bottom_l2,
            "dynamic_max": self.dynamic_max,
            "dynamic_l2": self.dynamic_l2,
            "max_norm": self.max_norm,
        }
        if self.per_mode:
            out["per_mode"] = {f"{i},{j}": v for (i, j), v in sorted(self.per_mode.items())}
        return out


def _grids(f, n1, n2):
    return synthesize(f, n1, n2).values


def momentum_grid(state, n1, n2):
    """M^T (u.grad)(M u) + grad wp on the grid, shape (3, n1, n2, n3)."""
    fl = build_flattening(state.eta, None, n1, n2)
    u = state.u
    ug = np.stack([_grids(c, n1, n2) for c in u])
    du = np.stack([np.stack([_grids(c.d1(), n1, n2), _grids(c.d2(), n1, n2), _grids(c.d3(), n1, n2)])
                   for c in u])  # du[l, j] = d_j u_l
    wp = state.wp
    gwp = np.stack([_grids(wp.d1(), n1, n2), _grids(wp.d2(), n1, n2), _grids(wp.d3(), n1, n2)])
    rho = fl.rho
    M = np.moveaxis(fl.M, (-2, -1), (0, 1))  # M[i, l, ...]
    drho = fl.ddphi[:, 2]                     # d_j rho = d_j d_3 phi
    # d_j M_il = delta_i3 d_j d_l phi / rho - M_il d_j rho / rho
    dM = -M[:, :, None] * (drho / rho)[None, None]
    dM[2] += np.moveaxis(fl.ddphi, 0, 1) / rho  # dM[2, l, j] += d_j d_l phi / rho
    # A_i = u_j d_j (M u)_i
    dw = np.einsum("iljxyz,lxyz->ijxyz", dM, ug) + np.einsum("ilxyz,ljxyz->ijxyz", M, du)
    A = np.einsum("jxyz,ijxyz->ixyz", ug, dw)
    return np.einsum("imxyz,ixyz->mxyz", M, A) + gwp


def surface_operator_grid(state, params, n1, n2):
    """wp - g eta + sigma * curvature term at the lid (or wp - D eta for custom symbols)."""
    eta = state.eta
    wp_top = _grids(state.wp, n1, n2)[..., -1]
    if params.capillary:
        e = TrigField(eta.lattice, eta.vgrid, eta.coeffs, eta.parity)
        E = _grids(e, n1, n2)[..., -1]
        E1 = _grids(e.d1(), n1, n2)[..., -1]
        E2 = _grids(e.d2(), n1, n2)[..., -1]
        E11 = _grids(e.d1().d1(), n1, n2)[..., -1]
        E12 = _grids(e.d1().d2(), n1, n2)[..., -1]
        E22 = _grids(e.d2().d2(), n1, n2)[..., -1]
        W2 = 1.0 + E1 * E1 + E2 * E2
        W = np.sqrt(W2)
        curv = (E11 + E22) / W - (E1 * E1 * E11 + 2.0 * E1 * E2 * E12 + E2 * E2 * E22) / (W2 * W)
        return wp_top - params.g * E + params.sigma * curv
    # generalised condition: linear symbol applied mode by mode
    lat = eta.lattice
    i = np.arange(eta.shape[0])[:, None] * lat.kappa1
    j = np.arange(eta.shape[1])[None, :] * lat.kappa2
    D = np.vectorize(params.symbol)(i * i + j * j)
    c = eta.coeffs * D[..., None]
    return wp_top - _grids(TrigField(lat, eta.vgrid, c, eta.parity), n1, n2)[..., -1]


def nonlinear_residual(state, params, n1=32, n2=32):
    """Residual of the full flattened system at the n1 x n2 x n3 collocation nodes."""
    mom = momentum_grid(state, n1, n2)
    div = _grids(state.u.divergence(), n1, n2)
    u3 = _grids(state.u[2], n1, n2)
    dyn = surface_operator_grid(state, params, n1, n2)
    mmax, ml2 = zip(*(_norms(m) for m in mom))
    return ResidualReport(tuple(mmax), tuple(ml2), *_norms(div), *_norms(u3[..., -1]),
                          *_norms(u3[..., 0]), *_norms(dyn), kind="nonlinear")


def linear_residual(fields, profile, params):
    """Mode-wise residual of the order-epsilon system around (U(x3), 0, 0).

    u3 U' e1 + U d1 u + U^2 d1 curl(phi e2) + grad wp = 0, div u = 0,
    u3 = 0 at both walls, wp - D(|k|^2) eta = 0 at the lid.  Norms are taken
    over trigonometric coefficients; ``per_mode`` holds the worst equation per
    (i, j).
    """
    if isinstance(fields, FlowState):
        eta, wp, u = fields.eta, fields.wp, fields.u
    else:
        eta, wp, u = fields.eta1, fields.wp1, fields.u1
    vg = u.vgrid
    z = vg.nodes
    U, dU = profile(z), profile.d1(z)
    phi = eta.times_profile(1.0 + z / vg.depth)
    c1, c2, c3 = u
    m1 = c3.times_profile(dU) + c1.d1().times_profile(U) - phi.d3().d1().times_profile(U * U) + wp.d1()
    m2 = c2.d1().times_profile(U) + wp.d2()
    m3 = c3.d1().times_profile(U) + phi.d1().d1().times_profile(U * U) + wp.d3()
    div = u.divergence()
    lat = eta.lattice
    ii = np.arange(eta.shape[0])[:, None] * lat.kappa1
    jj = np.arange(eta.shape[1])[None, :] * lat.kappa2
    D = np.vectorize(params.symbol)(ii * ii + jj * jj)
    wps = wp.padded(eta.shape).at_surface()[: eta.shape[0], : eta.shape[1]]
    dyn = wps - D * eta.at_surface()
    top, bottom = c3.at_surface(), c3.at_bottom()

    per_mode = {}
    for f in (m1, m2, m3, div):
        for (i, j), prof in f.modes().items():
            per_mode[(i, j)] = max(per_mode.get((i, j), 0.0), float(np.abs(prof).max()))
    for arr in (top, bottom, dyn):
        for (i, j), v in np.ndenumerate(arr):
            if v != 0.0:
                per_mode[(i, j)] = max(per_mode.get((i, j), 0.0), abs(float(v)))
    mom = [_norms(f.coeffs) for f in (m1, m2, m3)]
    return ResidualReport(tuple(m[0] for m in mom), tuple(m[1] for m in mom), *_norms(div.coeffs),
                          *_norms(top), *_norms(bottom), *_norms(dyn), per_mode=per_mode, kind="linear")


@dataclass
class ProbeResult:
    eps: list
    reports: list
    slope: object
    exact: bool

    def rows(self):
        return [dict(eps=e, **r.norms()) for e, r in zip(self.eps, self.reports)]

    def to_dict(self):
        return {"eps": list(self.eps), "slope": self.slope, "exact_solution": self.exact,
                "rows": self.rows()}


DEFAULT_EPS = (1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4)


def order_scaling_probe(profile, params, kernel, eps_list=DEFAULT_EPS, n1=32, n2=32, exact_tol=1e-10):
    """Fit log(momentum residual) against log(eps) for trivial + eps * kernel.

    The order-eps equations cancel exactly for a kernel element, so the slope
    should be 2.  If every residual stays below ``exact_tol`` the state is an
    exact solution and no slope is reported.
    """
    state1 = kernel.state() if hasattr(kernel, "state") else kernel
    bg = background_state(profile, state1.lattice, state1.vgrid)
    eps = [float(e) for e in eps_list]
    reports = [nonlinear_residual(bg + state1.scaled(e), params, n1, n2) for e in eps]
    norms = np.array([r.max_norm for r in reports])
    if np.all(norms <= exact_tol):
        return ProbeResult(eps, reports, None, True)
    mom = np.array([r.momentum for r in reports])
    slope = float(np.polyfit(np.log(eps), np.log(mom), 1)[0])
    return ProbeResult(eps, reports, slope, False)
