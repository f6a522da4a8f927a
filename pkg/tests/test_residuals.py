import numpy as np
import pytest

from conftest import calibrated
from shearwave.dispersion import find_kernel_set
from shearwave.fields import FlowState, KernelModeSet, assemble_kernel, background_state, trivial_state
from shearwave.residuals import linear_residual, nonlinear_residual, order_scaling_probe
from shearwave.spectral import VECTOR_PARITY, SymmetricVectorField, TrigField, VerticalGrid, symmetric_field
from shearwave.profiles import WaveParams


def test_background_is_exact(affine, lattice, vgrid):
    rep = nonlinear_residual(background_state(affine, lattice, vgrid), WaveParams(1.0, 0.5))
    assert rep.max_norm <= 1e-10


def test_x2_dependent_trivial_state(lattice, vgrid):
    st = trivial_state(lambda x2, x3: np.cos(x2) + 0 * x3, lattice, vgrid)
    assert nonlinear_residual(st, WaveParams(1.0, 0.5)).max_norm <= 1e-10
    st = trivial_state(lambda x2, x3: (2 + x3) * (1 + 0.1 * np.cos(x2)), lattice, vgrid)
    assert nonlinear_residual(st, WaveParams(1.0, 0.5), 32, 32).max_norm <= 1e-9


def random_state(lattice, vgrid, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    comps = [TrigField(lattice, vgrid, rng.standard_normal((3, 3, vgrid.n)), p) for p in VECTOR_PARITY]
    eta = symmetric_field(lattice, vgrid, {(1, 1): scale * 0.3, (0, 1): scale * 0.2})
    wp = TrigField(lattice, vgrid, rng.standard_normal((3, 3, vgrid.n)))
    return FlowState(SymmetricVectorField(*comps), wp, eta)


def test_generic_state_is_not_a_solution(lattice, vgrid):
    rep = nonlinear_residual(random_state(lattice, vgrid), WaveParams(1.0, 0.5), 16, 16)
    assert rep.momentum > 0.1
    assert all(v >= 0 for v in rep.norms().values())


def test_dynamic_condition_with_curvature(lattice, vgrid):
    # wp at the lid set to g eta - sigma curvature exactly for a pure cosine
    a = 1e-3
    eta = symmetric_field(lattice, vgrid, {(1, 0): a})
    params = WaveParams(2.0, 0.7)
    wp = symmetric_field(lattice, vgrid, {(1, 0): (params.g + params.sigma) * a})
    st = FlowState(SymmetricVectorField.zeros(lattice, vgrid), wp, eta)
    rep = nonlinear_residual(st, params, 16, 16)
    # the cubic curvature term is all that remains: sigma * 1.5 * a^3 at most
    assert rep.dynamic_max <= 2 * params.sigma * a ** 3
    assert rep.dynamic_max > 0


def test_custom_symbol_used_mode_by_mode(lattice, vgrid):
    params = WaveParams.polynomial_symbol(1.0, [1.0, 0.5, 0.25])
    eta = symmetric_field(lattice, vgrid, {(1, 1): 0.01})
    wp = symmetric_field(lattice, vgrid, {(1, 1): 0.01 * params.symbol(2.0)})
    st = FlowState(SymmetricVectorField.zeros(lattice, vgrid), wp, eta)
    assert nonlinear_residual(st, params, 8, 8).dynamic_max < 1e-15


def test_residual_parity(affine, lattice, vgrid):
    from shearwave.residuals import momentum_grid
    params = calibrated(affine, 1.0, lattice, (1, 1))
    res = find_kernel_set(affine, params, lattice)
    kf = assemble_kernel(affine, params, res, KernelModeSet(0.1, {(1, 1): 1.0}), vgrid)
    st = background_state(affine, lattice, vgrid) + kf.state().scaled(0.05)
    n = 16
    m = momentum_grid(st, n, n)
    r1 = (-np.arange(n)) % n
    # momentum of a (+)-symmetric state is (-)-symmetric: m(R_j x) = R_j m(x)
    assert np.allclose(m[:, r1], m * np.array([-1, 1, 1])[:, None, None, None], atol=1e-12)
    assert np.allclose(m[:, :, r1], m * np.array([1, -1, 1])[:, None, None, None], atol=1e-12)


def test_grid_refinement_consistency(affine, lattice, vgrid):
    params = calibrated(affine, 1.0, lattice, (1, 1))
    res = find_kernel_set(affine, params, lattice)
    kf = assemble_kernel(affine, params, res, KernelModeSet(0.0, {(1, 1): 1.0}), vgrid)
    st = background_state(affine, lattice, vgrid) + kf.state().scaled(1e-2)
    a = nonlinear_residual(st, params, 16, 16).norms()
    b = nonlinear_residual(st, params, 32, 32).norms()
    for key in a:
        assert b[key] <= 1.1 * a[key] + 1e-14


@pytest.fixture
def kernels(uniform, affine, lattice, vgrid):
    out = {}
    p = calibrated(affine, 1.0, lattice, (1, 0))
    out["2d"] = (affine, p, assemble_kernel(affine, p, find_kernel_set(affine, p, lattice),
                                            KernelModeSet(0.0, {(1, 0): 1.0}), vgrid))
    p = calibrated(affine, 1.0, lattice, (1, 1))
    out["3d"] = (affine, p, assemble_kernel(affine, p, find_kernel_set(affine, p, lattice),
                                            KernelModeSet(0.0, {(1, 1): 1.0}), vgrid))
    out["mixed"] = (affine, p, assemble_kernel(affine, p, find_kernel_set(affine, p, lattice),
                                               KernelModeSet(0.4, {(1, 1): -0.7}, {1: lambda x: 1 + x, 3: np.sin}),
                                               vgrid))
    return out


@pytest.mark.parametrize("name", ["2d", "3d", "mixed"])
def test_linear_residual_of_kernel(kernels, name):
    prof, params, kf = kernels[name]
    rep = linear_residual(kf, prof, params)
    assert rep.max_norm <= 1e-8
    assert rep.per_mode and max(rep.per_mode.values()) <= 1e-8


def test_off_resonance_only_dynamic_fails(affine, lattice, vgrid):
    p = calibrated(affine, 1.0, lattice, (1, 1))
    res = find_kernel_set(affine, p, lattice)
    kf = assemble_kernel(affine, p, res, KernelModeSet(0.0, {(2, 1): 1.0}), vgrid, check=False)
    rep = linear_residual(kf, affine, p)
    assert rep.dynamic_max > 1e-3
    assert max(rep.momentum, rep.divergence_max, rep.kinematic_top_max, rep.kinematic_bottom_max) <= 1e-8


def test_zero_fields_zero_norms(affine, lattice, vgrid):
    z = background_state(affine, lattice, vgrid).scaled(0.0)
    rep = linear_residual(z, affine, WaveParams(1.0, 1.0))
    assert rep.max_norm == 0.0
    d = rep.to_dict()
    assert d["kind"] == "linear" and d["max_norm"] == 0.0


@pytest.mark.parametrize("name", ["2d", "3d"])
def test_order_scaling(kernels, name):
    prof, params, kf = kernels[name]
    pr = order_scaling_probe(prof, params, kf)
    assert not pr.exact
    assert abs(pr.slope - 2.0) <= 0.1
    assert len(pr.rows()) == 7


def test_order_scaling_uniform(uniform, lattice, vgrid):
    params = calibrated(uniform, 1.0, lattice, (1, 0))
    kf = assemble_kernel(uniform, params, find_kernel_set(uniform, params, lattice),
                         KernelModeSet(0.0, {(1, 0): 1.0}), vgrid)
    assert abs(order_scaling_probe(uniform, params, kf).slope - 2.0) <= 0.1


def test_probe_of_zero_kernel_is_exact(affine, lattice, vgrid):
    params = calibrated(affine, 1.0, lattice, (1, 1))
    kf = assemble_kernel(affine, params, find_kernel_set(affine, params, lattice), KernelModeSet(), vgrid)
    pr = order_scaling_probe(affine, params, kf, n1=8, n2=8)
    assert pr.exact and pr.slope is None
    assert pr.to_dict()["exact_solution"] is True
