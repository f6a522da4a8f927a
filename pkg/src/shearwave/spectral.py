"""Real trigonometric fields on the doubly periodic slab.

A :class:`TrigField` stores real coefficients c[i, j, :] of

    sum_{i, j >= 0} c[i, j](x3) * T1(i kappa1 x1) * T2(j kappa2 x2)

where T1, T2 are cos (parity 0) or sin (parity 1).  The vertical dependence
is kept as nodal values on a shared :class:`VerticalGrid`.  (+)-symmetric
scalars live on cos.cos; (+)-symmetric vectors have components on cos.cos,
sin.sin and sin.cos.  Horizontal derivatives act exactly on coefficients and
flip the parity of the differentiated axis.

The exponential series sum_k a_k e^{i k.x'} with a_k even in both k1 and k2
corresponds to trigonometric coefficients 4 a_k (k1 k2 != 0), 2 a_k (exactly
one of k1, k2 zero) and a_0.  The sign on the second vector component and the
factor i on the third are absorbed here, so every stored array is real.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AliasError, ParameterError, ShapeMismatch
from .riccati import chebyshev_nodes

COS, SIN = 0, 1
SCALAR_PARITY = (COS, COS)
VECTOR_PARITY = ((COS, COS), (SIN, SIN), (SIN, COS))


def cheb_matrix(nodes):
    """Barycentric differentiation matrix on Chebyshev-Lobatto nodes."""
    n = nodes.size - 1
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    # the ascending node order reverses the usual sign pattern, which cancels in ratios
    X = nodes[:, None] - nodes[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D


@dataclass(frozen=True)
class VerticalGrid:
    depth: float
    nodes: np.ndarray = field(repr=False)
    kind: str = "chebyshev"

    @classmethod
    def chebyshev(cls, depth, n):
        return cls(float(depth), chebyshev_nodes(depth, n), "chebyshev")

    @classmethod
    def uniform(cls, depth, n):
        return cls(float(depth), np.linspace(-depth, 0.0, n), "uniform")

    @property
    def n(self):
        return self.nodes.size

    @property
    def matrix(self):
        D = self.__dict__.get("_D")
        if D is None:
            D = cheb_matrix(self.nodes)
            object.__setattr__(self, "_D", D)
        return D

    def diff(self, values, order=1):
        """Vertical derivative along the last axis."""
        values = np.asarray(values)
        if self.kind == "chebyshev":
            out = values
            for _ in range(order):
                out = out @ self.matrix.T
            return out
        return CubicSpline(self.nodes, values, axis=-1)(self.nodes, order)

    def same(self, other):
        return self is other or (self.kind == other.kind and self.depth == other.depth
                                 and np.array_equal(self.nodes, other.nodes))


def _basis(parity, kappa, x, m):
    arg = np.outer(x, kappa * np.arange(m))
    return np.cos(arg) if parity == COS else np.sin(arg)


class TrigField:
    """Scalar trigonometric field with fixed parity per horizontal axis."""

    __array_priority__ = 100

    def __init__(self, lattice, vgrid, coeffs, parity=SCALAR_PARITY):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[2] != vgrid.n:
            raise ShapeMismatch(f"coefficients must have shape (M1, M2, {vgrid.n}), got {coeffs.shape}")
        self.lattice = lattice
        self.vgrid = vgrid
        self.coeffs = coeffs
        self.parity = (int(parity[0]), int(parity[1]))
        # sin(0) modes are identically zero
        if self.parity[0] == SIN:
            self.coeffs[0] = 0.0
        if self.parity[1] == SIN:
            self.coeffs[:, 0] = 0.0

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, lattice, vgrid, shape=(1, 1), parity=SCALAR_PARITY):
        return cls(lattice, vgrid, np.zeros(tuple(shape) + (vgrid.n,)), parity)

    @classmethod
    def from_modes(cls, lattice, vgrid, modes, parity=SCALAR_PARITY, shape=None):
        """Build from {(i, j): profile}; profiles are scalars or arrays on the nodes."""
        if shape is None:
            m1 = max([i for i, _ in modes] + [0]) + 1
            m2 = max([j for _, j in modes] + [0]) + 1
            shape = (m1, m2)
        c = np.zeros(tuple(shape) + (vgrid.n,))
        for (i, j), prof in modes.items():
            if i < 0 or j < 0:
                raise ParameterError("trigonometric mode indices must be non-negative")
            c[i, j] += np.broadcast_to(np.asarray(prof, dtype=float), (vgrid.n,))
        return cls(lattice, vgrid, c, parity)

    def copy(self):
        return TrigField(self.lattice, self.vgrid, self.coeffs.copy(), self.parity)

    @property
    def shape(self):
        return self.coeffs.shape[:2]

    def modes(self, tol=0.0):
        """{(i, j): profile} for modes with any coefficient above ``tol``."""
        out = {}
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                if np.abs(self.coeffs[i, j]).max() > tol:
                    out[(i, j)] = self.coeffs[i, j]
        return out

    def padded(self, shape):
        m1, m2 = max(shape[0], self.shape[0]), max(shape[1], self.shape[1])
        if (m1, m2) == self.shape:
            return self
        c = np.zeros((m1, m2, self.vgrid.n))
        c[: self.shape[0], : self.shape[1]] = self.coeffs
        return TrigField(self.lattice, self.vgrid, c, self.parity)

    # algebra ----------------------------------------------------------------
    def _compatible(self, other):
        if not isinstance(other, TrigField):
            return NotImplemented
        if other.parity != self.parity:
            raise ShapeMismatch(f"parity mismatch {self.parity} vs {other.parity}")
        if not self.vgrid.same(other.vgrid) or self.lattice != other.lattice:
            raise ShapeMismatch("fields live on different grids or lattices")
        shape = (max(self.shape[0], other.shape[0]), max(self.shape[1], other.shape[1]))
        return self.padded(shape), other.padded(shape)

    def __add__(self, other):
        pair = self._compatible(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        return TrigField(self.lattice, self.vgrid, a.coeffs + b.coeffs, self.parity)

    def __sub__(self, other):
        pair = self._compatible(other)
        if pair is NotImplemented:
            return pair
        a, b = pair
        return TrigField(self.lattice, self.vgrid, a.coeffs - b.coeffs, self.parity)

    def __neg__(self):
        return TrigField(self.lattice, self.vgrid, -self.coeffs, self.parity)

    def __mul__(self, s):
        if np.ndim(s) == 0:
            return TrigField(self.lattice, self.vgrid, self.coeffs * float(s), self.parity)
        return NotImplemented

    __rmul__ = __mul__

    def times_profile(self, prof):
        """Multiply by a function of x3 only (keeps parity)."""
        prof = np.broadcast_to(np.asarray(prof, dtype=float), (self.vgrid.n,))
        return TrigField(self.lattice, self.vgrid, self.coeffs * prof, self.parity)

    # calculus ---------------------------------------------------------------
    def d1(self):
        i = np.arange(self.shape[0]) * self.lattice.kappa1
        sign = -1.0 if self.parity[0] == COS else 1.0
        c = sign * self.coeffs * i[:, None, None]
        return TrigField(self.lattice, self.vgrid, c, (1 - self.parity[0], self.parity[1]))

    def d2(self):
        j = np.arange(self.shape[1]) * self.lattice.kappa2
        sign = -1.0 if self.parity[1] == COS else 1.0
        c = sign * self.coeffs * j[None, :, None]
        return TrigField(self.lattice, self.vgrid, c, (self.parity[0], 1 - self.parity[1]))

    def d3(self, order=1):
        return TrigField(self.lattice, self.vgrid, self.vgrid.diff(self.coeffs, order), self.parity)

    def differentiate(self, axis):
        return {1: self.d1, 2: self.d2, 3: self.d3}[axis]()

    def x1_average(self):
        """Mean over one x1 period: keeps the i = 0 modes of a cos-in-x1 field."""
        c = np.zeros((1, self.shape[1], self.vgrid.n))
        if self.parity[0] == COS:
            c[0] = self.coeffs[0]
        return TrigField(self.lattice, self.vgrid, c, self.parity)

    # evaluation -------------------------------------------------------------
    def at_surface(self):
        return self.coeffs[:, :, -1]

    def at_bottom(self):
        return self.coeffs[:, :, 0]

    def evaluate(self, x1, x2):
        """Values at horizontal points (x1[m], x2[m]); shape (npts, n3)."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        B1 = _basis(self.parity[0], self.lattice.kappa1, x1, self.shape[0])
        B2 = _basis(self.parity[1], self.lattice.kappa2, x2, self.shape[1])
        return np.einsum("pi,pj,ijz->pz", B1, B2, self.coeffs)

    def synthesize(self, n1, n2):
        return synthesize(self, n1, n2)

    def max_abs(self):
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def __repr__(self):
        return f"TrigField(shape={self.shape}, n3={self.vgrid.n}, parity={self.parity})"


SymmetricField = TrigField


def symmetric_field(lattice, vgrid, modes, shape=None):
    """(+)-symmetric scalar: cos(k1 x1) cos(k2 x2) modes."""
    return TrigField.from_modes(lattice, vgrid, modes, SCALAR_PARITY, shape)


class SymmetricVectorField:
    """(+)-symmetric vector field with components on cos.cos, sin.sin, sin.cos."""

    def __init__(self, c1, c2, c3):
        for comp, par in zip((c1, c2, c3), VECTOR_PARITY):
            if comp.parity != par:
                raise ShapeMismatch(f"component parity {comp.parity} should be {par}")
        self.components = (c1, c2, c3)

    @classmethod
    def zeros(cls, lattice, vgrid, shape=(1, 1)):
        return cls(*(TrigField.zeros(lattice, vgrid, shape, p) for p in VECTOR_PARITY))

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    @property
    def lattice(self):
        return self.components[0].lattice

    @property
    def vgrid(self):
        return self.components[0].vgrid

    def __add__(self, other):
        return SymmetricVectorField(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        return SymmetricVectorField(*(a - b for a, b in zip(self, other)))

    def __mul__(self, s):
        return SymmetricVectorField(*(a * s for a in self))

    __rmul__ = __mul__

    def divergence(self):
        return self[0].d1() + self[1].d2() + self[2].d3()

    def evaluate(self, x1, x2):
        return np.stack([c.evaluate(x1, x2) for c in self], axis=-1)

    def synthesize(self, n1, n2):
        return tuple(synthesize(c, n1, n2) for c in self)

    def max_abs(self):
        return max(c.max_abs() for c in self)


@dataclass
class Grid3D:
    """Collocation values on [0, lambda1) x [0, lambda2) x vertical nodes."""

    values: np.ndarray
    lattice: object
    vgrid: VerticalGrid
    parity: tuple = None

    def __post_init__(self):
        n1, n2, n3 = self.values.shape
        if n1 % 2 or n2 % 2:
            raise ParameterError(f"horizontal grid sizes must be even, got {n1}x{n2}")
        if n3 != self.vgrid.n:
            raise ShapeMismatch("vertical size does not match the vertical grid")

    @property
    def shape(self):
        return self.values.shape

    @property
    def x1(self):
        return self.lattice.lambda1 * np.arange(self.shape[0]) / self.shape[0]

    @property
    def x2(self):
        return self.lattice.lambda2 * np.arange(self.shape[1]) / self.shape[1]

    def max_abs(self):
        return float(np.abs(self.values).max())


def horizontal_nodes(lattice, n1, n2):
    return (lattice.lambda1 * np.arange(n1) / n1, lattice.lambda2 * np.arange(n2) / n2)


def synthesize(f, n1, n2):
    """Evaluate a trigonometric field on the uniform n1 x n2 horizontal grid."""
    m1, m2 = f.shape
    if 2 * (m1 - 1) >= n1 or 2 * (m2 - 1) >= n2:
        raise AliasError(f"modes up to ({m1 - 1}, {m2 - 1}) need a grid larger than {n1}x{n2}")
    x1, x2 = horizontal_nodes(f.lattice, n1, n2)
    B1 = _basis(f.parity[0], f.lattice.kappa1, x1, m1)
    B2 = _basis(f.parity[1], f.lattice.kappa2, x2, m2)
    vals = np.einsum("ai,bj,ijz->abz", B1, B2, f.coeffs, optimize=True)
    return Grid3D(vals, f.lattice, f.vgrid, f.parity)


def analyze(grid, max_modes, parity=None):
    """Project grid values onto the trigonometric basis of the given parity.

    Exact left inverse of :func:`synthesize` for band-limited data with the
    highest mode index strictly below half the grid size.
    """
    if parity is None:
        parity = grid.parity if grid.parity is not None else SCALAR_PARITY
    m1, m2 = max_modes
    n1, n2, _ = grid.shape
    if 2 * (m1 - 1) >= n1 or 2 * (m2 - 1) >= n2:
        raise AliasError(f"cannot resolve modes up to ({m1 - 1}, {m2 - 1}) on a {n1}x{n2} grid")
    x1, x2 = horizontal_nodes(grid.lattice, n1, n2)
    w1 = np.full(m1, 2.0 / n1)
    w2 = np.full(m2, 2.0 / n2)
    if parity[0] == COS:
        w1[0] = 1.0 / n1
    if parity[1] == COS:
        w2[0] = 1.0 / n2
    B1 = _basis(parity[0], grid.lattice.kappa1, x1, m1) * w1
    B2 = _basis(parity[1], grid.lattice.kappa2, x2, m2) * w2
    c = np.einsum("ai,bj,abz->ijz", B1, B2, grid.values, optimize=True)
    return TrigField(grid.lattice, grid.vgrid, c, parity)


def x1_average(obj):
    """x1-mean: exact mode selection for fields, periodic trapezoid for grids.

    Grids return an (n2, n3) array indexed by (x2, x3).
    """
    if isinstance(obj, TrigField):
        return obj.x1_average()
    values = obj.values if isinstance(obj, Grid3D) else np.asarray(obj)
    return values.mean(axis=0)


def pointwise_product(a, b):
    if not isinstance(a, Grid3D) or not isinstance(b, Grid3D):
        raise ShapeMismatch("pointwise_product takes two Grid3D values")
    if a.shape != b.shape or a.lattice != b.lattice or not a.vgrid.same(b.vgrid):
        raise ShapeMismatch(f"grid mismatch: {a.shape} vs {b.shape}")
    par = None
    if a.parity is not None and b.parity is not None:
        par = ((a.parity[0] + b.parity[0]) % 2, (a.parity[1] + b.parity[1]) % 2)
    return Grid3D(a.values * b.values, a.lattice, a.vgrid, par)


def x2_derivative(values, lattice, order=1):
    """Exact x2-derivatives of (n2, ...) samples of a band-limited periodic function.

    Works along axis 0, so it applies directly to x1-averaged quantities
    indexed by (x2, x3).  The Nyquist coefficient is dropped.
    """
    values = np.asarray(values, dtype=float)
    n2 = values.shape[0]
    c = np.fft.rfft(values, axis=0)
    kk = lattice.kappa2 * np.arange(c.shape[0])
    mult = (1j * kk) ** order
    if n2 % 2 == 0:
        mult[-1] = 0.0
    c = c * mult.reshape((-1,) + (1,) * (c.ndim - 1))
    return np.fft.irfft(c, n=n2, axis=0)


# dumps ----------------------------------------------------------------------

def dump_grid(path, grid, name=None, extra=None):
    """Write ``<path>.bin`` (float64, C order) plus a ``<path>.json`` header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(grid.values, dtype="<f8")
    values.tofile(path.with_suffix(".bin"))
    header = {
        "name": name or path.name,
        "dtype": "float64-le",
        "order": "C",
        "shape": list(values.shape),
        "axes": ["x1", "x2", "x3"],
        "lattice": grid.lattice.to_dict(),
        "depth": grid.vgrid.depth,
        "vertical_nodes": grid.vgrid.kind,
        "x3": grid.vgrid.nodes.tolist(),
        "parity": None if grid.parity is None else ["cos" if p == COS else "sin" for p in grid.parity],
    }
    if extra:
        header.update(extra)
    path.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return path.with_suffix(".bin"), path.with_suffix(".json")


def load_grid(path):
    from .profiles import LatticeSpec

    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    values = np.fromfile(path.with_suffix(".bin"), dtype="<f8").reshape(header["shape"])
    lattice = LatticeSpec.from_dict(header["lattice"])
    nodes = np.asarray(header["x3"])
    vgrid = VerticalGrid(header["depth"], nodes, header["vertical_nodes"])
    par = header.get("parity")
    parity = None if par is None else tuple(COS if p == "cos" else SIN for p in par)
    return Grid3D(values, lattice, vgrid, parity)
