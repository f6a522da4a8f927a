import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shearwave.errors import AliasError, ParameterError, ShapeMismatch
from shearwave.profiles import LatticeSpec
from shearwave.spectral import (COS, SCALAR_PARITY, SIN, VECTOR_PARITY, Grid3D, SymmetricVectorField, TrigField,
                                VerticalGrid, analyze, cheb_matrix, dump_grid, load_grid, pointwise_product,
                                symmetric_field, synthesize, x1_average, x2_derivative)

LAT = LatticeSpec(2.0, 3.0)
VG = VerticalGrid.chebyshev(1.5, 9)
PARITIES = [(a, b) for a in (COS, SIN) for b in (COS, SIN)]


def random_field(rng, shape=(4, 5), parity=SCALAR_PARITY, vg=VG):
    return TrigField(LAT, vg, rng.standard_normal(shape + (vg.n,)), parity)


def test_cheb_matrix_exact_on_polynomials():
    x = VG.nodes
    D = cheb_matrix(x)
    assert np.allclose(D @ x ** 5, 5 * x ** 4, atol=1e-11)
    assert np.allclose(VG.diff(x ** 3, 2), 6 * x, atol=1e-10)


def test_uniform_vertical_grid_diff():
    vg = VerticalGrid.uniform(1.0, 201)
    assert np.allclose(vg.diff(np.sin(vg.nodes)), np.cos(vg.nodes), atol=1e-6)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(PARITIES))
def test_synthesize_analyze_round_trip(seed, parity):
    f = random_field(np.random.default_rng(seed), parity=parity)
    g = analyze(synthesize(f, 10, 12), f.shape, parity)
    assert np.abs(g.coeffs - f.coeffs).max() < 1e-12


def test_alias_guard():
    f = random_field(np.random.default_rng(0), shape=(6, 2))
    with pytest.raises(AliasError):
        synthesize(f, 10, 8)
    with pytest.raises(AliasError):
        analyze(synthesize(f, 12, 8), (7, 2))


def test_odd_grid_rejected():
    with pytest.raises(ParameterError):
        Grid3D(np.zeros((3, 4, VG.n)), LAT, VG)


def test_horizontal_derivatives_match_pointwise():
    rng = np.random.default_rng(1)
    for parity in PARITIES:
        f = random_field(rng, parity=parity)
        x1, x2 = rng.uniform(0, 2, 6), rng.uniform(0, 3, 6)
        h = 1e-5
        fd1 = (f.evaluate(x1 + h, x2) - f.evaluate(x1 - h, x2)) / (2 * h)
        fd2 = (f.evaluate(x1, x2 + h) - f.evaluate(x1, x2 - h)) / (2 * h)
        assert np.allclose(f.d1().evaluate(x1, x2), fd1, atol=1e-6)
        assert np.allclose(f.d2().evaluate(x1, x2), fd2, atol=1e-6)
        assert f.d1().parity == (1 - parity[0], parity[1])


def test_sin_zero_modes_dropped():
    c = np.ones((2, 2, VG.n))
    f = TrigField(LAT, VG, c, (SIN, SIN))
    assert np.all(f.coeffs[0] == 0) and np.all(f.coeffs[:, 0] == 0)


def test_algebra():
    rng = np.random.default_rng(2)
    a = random_field(rng, (2, 3))
    b = random_field(rng, (4, 1))
    s = a + b
    assert s.shape == (4, 3)
    assert np.allclose((s - b).coeffs[:2], a.coeffs)
    assert np.allclose((-a * 2.0).coeffs, -2 * a.coeffs)
    with pytest.raises(ShapeMismatch):
        a + random_field(rng, parity=(SIN, COS))
    prof = np.linspace(1, 2, VG.n)
    assert np.allclose(a.times_profile(prof).coeffs, a.coeffs * prof)


def test_x1_average_field_vs_grid():
    rng = np.random.default_rng(3)
    f = random_field(rng)
    g = synthesize(f, 10, 12)
    avg = synthesize(f.x1_average(), 10, 12).values[0]
    assert np.allclose(x1_average(g), avg, atol=1e-13)
    s = random_field(rng, parity=(SIN, COS))
    assert np.abs(x1_average(synthesize(s, 10, 12))).max() < 1e-13
    assert s.x1_average().max_abs() == 0.0


def test_product_parity_and_exactness():
    rng = np.random.default_rng(4)
    a = random_field(rng, (3, 3), (SIN, SIN))
    b = random_field(rng, (3, 3), (SIN, COS))
    p = pointwise_product(synthesize(a, 12, 12), synthesize(b, 12, 12))
    assert p.parity == (COS, SIN)
    back = analyze(p, (5, 5))
    x1, x2 = rng.uniform(0, 2, 5), rng.uniform(0, 3, 5)
    assert np.allclose(back.evaluate(x1, x2), a.evaluate(x1, x2) * b.evaluate(x1, x2), atol=1e-12)


def test_x2_derivative_spectral():
    x2 = 3.0 * np.arange(16) / 16
    kap = LAT.kappa2
    vals = np.outer(np.sin(2 * kap * x2) + 0.5 * np.cos(3 * kap * x2), np.ones(4))
    d1 = x2_derivative(vals, LAT)
    d2 = x2_derivative(vals, LAT, 2)
    exact1 = 2 * kap * np.cos(2 * kap * x2) - 1.5 * kap * np.sin(3 * kap * x2)
    exact2 = -4 * kap ** 2 * np.sin(2 * kap * x2) - 4.5 * kap ** 2 * np.cos(3 * kap * x2)
    assert np.allclose(d1[:, 0], exact1, atol=1e-12)
    assert np.allclose(d2[:, 2], exact2, atol=1e-11)


def test_symmetric_vector_parities():
    z = TrigField.zeros(LAT, VG)
    with pytest.raises(ShapeMismatch):
        SymmetricVectorField(z, z, z)
    v = SymmetricVectorField.zeros(LAT, VG)
    assert tuple(c.parity for c in v) == VECTOR_PARITY


def test_divergence_of_vector():
    rng = np.random.default_rng(5)
    c = [random_field(rng, (3, 3), p) for p in VECTOR_PARITY]
    v = SymmetricVectorField(*c)
    x1, x2 = rng.uniform(0, 2, 4), rng.uniform(0, 3, 4)
    expect = c[0].d1().evaluate(x1, x2) + c[1].d2().evaluate(x1, x2) + c[2].d3().evaluate(x1, x2)
    assert np.allclose(v.divergence().evaluate(x1, x2), expect)


def test_symmetric_field_from_modes():
    f = symmetric_field(LAT, VG, {(1, 0): 2.0, (0, 2): np.linspace(0, 1, VG.n)})
    assert f.shape == (2, 3)
    assert f.modes().keys() == {(1, 0), (0, 2)}


def test_dump_load_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    g = synthesize(random_field(rng, parity=(SIN, COS)), 10, 12)
    bin_path, json_path = dump_grid(tmp_path / "sub" / "field", g, "field", {"note": 1})
    assert bin_path.stat().st_size == g.values.size * 8
    back = load_grid(tmp_path / "sub" / "field")
    assert np.array_equal(back.values, g.values)
    assert back.parity == (SIN, COS) and back.lattice == LAT
    assert np.array_equal(back.vgrid.nodes, VG.nodes)
