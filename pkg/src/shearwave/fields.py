"""Flattening transform, trivial states and first-order kernel fields.

The free surface x3 = eta(x') is mapped to the flat lid of [-d, 0] by
Phi(x) = x + phi(x) e3 with phi = (1 + x3/d) eta.  With J = I + e3 (x) grad phi
and rho = det J = 1 + eta/d, vectors are transported by J vbar = rho v o Phi,
which keeps divergence-free fields divergence-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSurface, NonResonantMode, ParameterError, SymmetryViolation
from .riccati import pressure_profile, solve_riccati
from .spectral import (COS, SCALAR_PARITY, SIN, SymmetricVectorField, TrigField, VerticalGrid,
                       analyze, horizontal_nodes, synthesize, Grid3D)


@dataclass
class FlowState:
    """(u, wp, eta) in flattened coordinates; eta is constant in x3."""

    u: SymmetricVectorField
    wp: TrigField
    eta: TrigField

    @property
    def lattice(self):
        return self.u.lattice

    @property
    def vgrid(self):
        return self.u.vgrid

    def __add__(self, other):
        return FlowState(self.u + other.u, self.wp + other.wp, self.eta + other.eta)

    def scaled(self, s):
        return FlowState(self.u * s, self.wp * s, self.eta * s)


@dataclass
class Flattening:
    """Grid quantities of the flattening for a given surface.

    ``dphi[a]`` is d_a phi and ``ddphi[a, b]`` is d_a d_b phi (axes 0..2 for
    x1..x3), each of shape (n1, n2, n3).
    """

    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    rho: np.ndarray
    J: np.ndarray
    M: np.ndarray


def _surface_coeffs(eta):
    # eta carries a constant vertical profile; read it at the lid
    return TrigField(eta.lattice, eta.vgrid, eta.coeffs[:, :, -1:].repeat(eta.vgrid.n, axis=2), eta.parity)


def build_flattening(eta, depth=None, n1=32, n2=32):
    """phi, J, rho and M = J/rho on the n1 x n2 x n3 grid."""
    vg = eta.vgrid
    d = vg.depth if depth is None else float(depth)
    e = _surface_coeffs(eta)
    E = synthesize(e, n1, n2).values
    E1 = synthesize(e.d1(), n1, n2).values
    E2 = synthesize(e.d2(), n1, n2).values
    E11 = synthesize(e.d1().d1(), n1, n2).values
    E12 = synthesize(e.d1().d2(), n1, n2).values
    E22 = synthesize(e.d2().d2(), n1, n2).values
    s = 1.0 + vg.nodes / d
    rho = 1.0 + E / d
    if np.any(rho <= 0):
        raise DegenerateSurface(f"1 + eta/d reaches {rho.min():.3g}; the surface touches the bed")
    phi = s * E
    dphi = np.stack([s * E1, s * E2, E / d])
    zero = np.zeros_like(E)
    ddphi = np.stack([
        np.stack([s * E11, s * E12, E1 / d]),
        np.stack([s * E12, s * E22, E2 / d]),
        np.stack([E1 / d, E2 / d, zero]),
    ])
    shp = E.shape
    J = np.zeros(shp + (3, 3))
    J[..., 0, 0] = 1.0
    J[..., 1, 1] = 1.0
    J[..., 2, 0] = dphi[0]
    J[..., 2, 1] = dphi[1]
    J[..., 2, 2] = rho
    M = J / rho[..., None, None]
    return Flattening(phi, dphi, ddphi, rho, J, M)


def pushforward_vector(v, eta, n1=32, n2=32):
    """Flatten a vector field given as a callable v(x1, x2, x3) -> (v1, v2, v3).

    Returns vbar on the flattened grid, shape (n1, n2, n3, 3), from
    J vbar = rho v o Phi, i.e. vbar = (rho v1, rho v2, v3 - phi_1 v1 - phi_2 v2).
    """
    fl = build_flattening(eta, None, n1, n2)
    x1, x2 = horizontal_nodes(eta.lattice, n1, n2)
    X1, X2, X3 = np.meshgrid(x1, x2, eta.vgrid.nodes, indexing="ij")
    v1, v2, v3 = v(X1, X2, X3 + fl.phi)
    return np.stack([fl.rho * v1, fl.rho * v2, v3 - fl.dphi[0] * v1 - fl.dphi[1] * v2], axis=-1)


def pullback_vector(vbar, eta):
    """Inverse of :func:`pushforward_vector`: (v o Phi) = M vbar at the grid nodes."""
    n1, n2 = vbar.shape[:2]
    fl = build_flattening(eta, None, n1, n2)
    return np.einsum("...ij,...j->...i", fl.M, vbar)


def trivial_state(U2d, lattice, vgrid, n2=32, tol=1e-12):
    """u = (U(x2, x3), 0, 0), wp = 0, eta = 0.

    ``U2d(x2, x3)`` must be even and lambda2-periodic in x2; it is projected
    onto cos(j kappa2 x2) for j < n2/2.
    """
    x2 = lattice.lambda2 * np.arange(n2) / n2
    X2, X3 = np.meshgrid(x2, vgrid.nodes, indexing="ij")
    vals = np.asarray(U2d(X2, X3), dtype=float) * np.ones_like(X2)
    mirror = np.asarray(U2d(-X2, X3), dtype=float) * np.ones_like(X2)
    shifted = np.asarray(U2d(X2 + lattice.lambda2, X3), dtype=float) * np.ones_like(X2)
    scale = max(np.abs(vals).max(), 1.0)
    if np.abs(vals - mirror).max() > tol * scale:
        raise SymmetryViolation("U(x2, x3) must be even in x2")
    if np.abs(vals - shifted).max() > 1e-10 * scale:
        raise SymmetryViolation("U(x2, x3) must be lambda2-periodic")
    grid = Grid3D(np.broadcast_to(vals, (2,) + vals.shape).copy(), lattice, vgrid, SCALAR_PARITY)
    c1 = analyze(grid, (1, n2 // 2), SCALAR_PARITY)
    u = SymmetricVectorField.zeros(lattice, vgrid)
    u = SymmetricVectorField(c1, u[1], u[2])
    zero = TrigField.zeros(lattice, vgrid)
    return FlowState(u, zero, zero.copy())


def background_state(profile, lattice, vgrid):
    """The shear flow (U(x3), 0, 0) with flat surface and zero dynamic pressure."""
    return trivial_state(lambda x2, x3: profile(x3), lattice, vgrid, n2=2)


@dataclass
class KernelModeSet:
    """Amplitudes of a kernel element.

    ``modes`` maps representative lattice indices (i > 0, j >= 0) to the
    amplitude a_k of the exponential series; the symmetric partners share it.
    ``w`` maps j >= 0 to a vertical profile (array on the nodes or callable of
    x3) of the free shear perturbation w(x2, x3) = sum_j w_j(x3) cos(j kappa2 x2).
    """

    a0: float = 0.0
    modes: dict = field(default_factory=dict)
    w: dict = field(default_factory=dict)

    def __post_init__(self):
        norm = {}
        for (i, j), a in dict(self.modes).items():
            key = (abs(int(i)), abs(int(j)))
            if key in norm and norm[key] != float(a):
                raise ParameterError(f"conflicting amplitudes for the symmetric orbit of {key}")
            norm[key] = float(a)
        self.modes = norm

    def nonzero(self):
        return {k: a for k, a in self.modes.items() if a != 0.0}

    def scaled(self, c):
        return KernelModeSet(c * self.a0, {k: c * a for k, a in self.modes.items()},
                             {j: (lambda x, f=f: c * np.asarray(f(x))) if callable(f) else c * np.asarray(f)
                              for j, f in self.w.items()})

    @classmethod
    def from_dict(cls, block):
        modes = {tuple(m["k"]): float(m["a"]) for m in block.get("modes", [])}
        w = {}
        for item in block.get("w", []):
            coeffs = np.asarray(item["coeffs"], dtype=float)
            w[int(item["j"])] = (lambda x, c=coeffs: np.polynomial.polynomial.polyval(x, c))
        return cls(float(block.get("a0", 0.0)), modes, w)


@dataclass
class ModeData:
    """Vertical data of one resonant representative on the field nodes."""

    index: tuple
    k: tuple
    amplitude: float
    trig_amplitude: float
    q: np.ndarray
    dq: np.ndarray
    Q: np.ndarray


@dataclass
class KernelFields:
    eta1: TrigField
    wp1: TrigField
    u1: SymmetricVectorField
    v1: SymmetricVectorField
    modes: list
    amplitudes: KernelModeSet

    def state(self):
        return FlowState(self.u1, self.wp1, self.eta1)


def trig_factor(i, j):
    """Ratio between the cos/sin coefficient and the exponential amplitude."""
    return (2 if i else 1) * (2 if j else 1)


def mode_data(profile, resonant, amplitudes, vgrid, tol=1e-10):
    """q, q', Q on ``vgrid`` for every nonzero amplitude; checks resonance."""
    out = []
    for (i, j), a in sorted(amplitudes.nonzero().items()):
        if i == 0 or resonant is None or (i, j) not in resonant:
            raise NonResonantMode(f"mode {(i, j)} is not in N(U); its amplitude must vanish")
        k = resonant.lattice.k(i, j)
        sol = solve_riccati(profile, k, tol=tol, nodes=vgrid.nodes)
        if sol.nodes.size != vgrid.n:
            raise ParameterError("vertical grid must include both endpoints")
        Q = pressure_profile(sol)
        out.append(ModeData((i, j), k, a, a * trig_factor(i, j), sol.q, sol.dq, Q.values))
    return out


def assemble_kernel(profile, params, resonant, amplitudes, vgrid, tol=1e-10, check=True, lattice=None):
    """First-order kernel element (eta1, wp1, u1, v1) in trigonometric form.

    eta1 = a0 + sum a_k e^{ik.x'},  wp1 = D(0) a0 + sum a_k Q_k e^{ik.x'},
    u1 = -curl(U phi1 e2) + v1 and

    v1 = w e1 + sum a_k Q_k [(-k, i q_k)/(U k1) - q_k U' e1/(k1^2 U^2)] e^{ik.x'}.

    With ``check=False`` amplitudes on non-resonant modes are accepted, which
    is useful for showing that only the dynamic condition then fails.
    """
    if lattice is None:
        if resonant is None:
            raise ParameterError("pass a resonant set (possibly empty) or a lattice")
        lattice = resonant.lattice
    if check:
        data = mode_data(profile, resonant, amplitudes, vgrid, tol)
    else:
        data = _mode_data_unchecked(profile, amplitudes, vgrid, tol, lattice)
    z = vgrid.nodes
    d = vgrid.depth
    U, dU = profile(z), profile.d1(z)
    s = 1.0 + z / d
    dF = dU * s + U / d            # d/dx3 of U (1 + x3/d)

    m1 = max([m.index[0] for m in data] + [0]) + 1
    m2 = max([m.index[1] for m in data] + [j for j in amplitudes.w] + [0]) + 1
    shape = (m1, m2, vgrid.n)
    eta = np.zeros(shape)
    wp = np.zeros(shape)
    v1c, v2c, v3c = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    r1c, r3c = np.zeros(shape), np.zeros(shape)  # -curl(U phi1 e2)

    a0 = amplitudes.a0
    eta[0, 0] = a0
    wp[0, 0] = params.symbol(0.0) * a0
    r1c[0, 0] = a0 * dF
    for j, wj in amplitudes.w.items():
        v1c[0, j] += np.broadcast_to(wj(z) if callable(wj) else np.asarray(wj, dtype=float), z.shape)

    for m in data:
        i, j = m.index
        k1, k2 = m.k
        E = m.trig_amplitude
        eta[i, j] += E
        wp[i, j] += E * m.Q
        v1c[i, j] += E * m.Q * (-1.0 / U - m.q * dU / (k1 * k1 * U * U))
        v2c[i, j] += E * m.Q * k2 / (k1 * U)
        v3c[i, j] += -E * m.Q * m.q / (k1 * U)
        r1c[i, j] += E * dF
        r3c[i, j] += k1 * E * U * s

    mk = lambda c, p: TrigField(lattice, vgrid, c, p)
    v1 = SymmetricVectorField(mk(v1c, (COS, COS)), mk(v2c, (SIN, SIN)), mk(v3c, (SIN, COS)))
    rot = SymmetricVectorField(mk(r1c, (COS, COS)), mk(np.zeros(shape), (SIN, SIN)), mk(r3c, (SIN, COS)))
    return KernelFields(mk(eta, SCALAR_PARITY), mk(wp, SCALAR_PARITY), rot + v1, v1, data, amplitudes)


def _mode_data_unchecked(profile, amplitudes, vgrid, tol, lattice):
    out = []
    for (i, j), a in sorted(amplitudes.nonzero().items()):
        if i == 0:
            raise NonResonantMode("k1 = 0 modes carry no pressure; use w for the k1 = 0 sector")
        k = lattice.k(i, j)
        sol = solve_riccati(profile, k, tol=tol, nodes=vgrid.nodes)
        Q = pressure_profile(sol)
        out.append(ModeData((i, j), k, a, a * trig_factor(i, j), sol.q, sol.dq, Q.values))
    return out
