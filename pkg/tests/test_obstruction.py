import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import calibrated
from shearwave.dispersion import find_kernel_set
from shearwave.errors import NonResonantMode
from shearwave.fields import KernelModeSet, assemble_kernel
from shearwave.obstruction import (INCONCLUSIVE, KERNEL_2D_ONLY, OBSTRUCTED_3D, UNIFORM_FLOW, averaged_bilinears,
                                   mode_jets, obstruction_f, solvability_average, theorem_verdict)
from shearwave.profiles import LatticeSpec, ShearProfile
from shearwave.spectral import VerticalGrid, synthesize, x2_derivative

CUBIC = ShearProfile.poly([1.5, 0.3, -0.2, 0.1], 1.0)


def test_jets_match_spectral_derivatives(affine, lattice):
    vg = VerticalGrid.chebyshev(1.0, 65)
    (m,) = mode_jets(affine, lattice, KernelModeSet(0.0, {(1, 2): 1.0}), vg.nodes)
    for jet in (m.q, m.Q):
        assert np.allclose(vg.diff(jet[0]), jet[1], atol=1e-8)
        assert np.allclose(vg.diff(jet[1]), jet[2], atol=1e-7)


def test_bilinears_match_closed_forms(affine, lattice):
    amps = KernelModeSet(0.0, {(1, 1): 1.0, (2, 3): -0.5})
    ab = averaged_bilinears(affine, lattice, amps)
    for key, err in ab.max_error().items():
        assert err <= 1e-8, key
    assert np.abs(ab.closed["v2v3"]).max() > 0.1


def test_bilinears_against_assembled_kernel(affine, lattice, vgrid):
    params = calibrated(affine, 1.0, lattice, (1, 1))
    kf = assemble_kernel(affine, params, find_kernel_set(affine, params, lattice),
                         KernelModeSet(0.0, {(1, 1): 1.0}), vgrid)
    v2 = synthesize(kf.v1[1], 8, 8).values
    v3 = synthesize(kf.v1[2], 8, 8).values
    ab = averaged_bilinears(affine, lattice, KernelModeSet(0.0, {(1, 1): 1.0}), vgrid, 8, 8)
    assert np.allclose((v2 * v3).mean(axis=0), ab.grid["v2v3"], atol=1e-12)
    assert np.allclose(x2_derivative((v3 * v3).mean(axis=0), lattice), ab.grid["d2_v3sq"], atol=1e-12)


def test_bilinears_vanish_for_2d(affine, lattice):
    ab = averaged_bilinears(affine, lattice, KernelModeSet(0.0, {(1, 0): 1.0, (2, 0): 0.3}))
    for key in ab.grid:
        assert np.abs(ab.grid[key]).max() <= 1e-12
        assert np.abs(ab.closed[key]).max() == 0.0


def test_v2v3_vanishes_on_x2_zero(affine, lattice):
    ab = averaged_bilinears(affine, lattice, KernelModeSet(0.0, {(1, 1): 1.0}))
    assert ab.x2[0] == 0.0
    assert np.abs(ab.grid["v2v3"][0]).max() < 1e-14


@pytest.mark.parametrize("profile,modes", [
    (ShearProfile.poly([2.0, 1.0], 1.0), {(1, 1): 1.0}),
    (CUBIC, {(1, 2): 1.0, (3, 1): 0.4}),
    (ShearProfile.poly([-1.2, 0.5, 0.3], 2.0), {(2, 2): 0.7}),
])
def test_solvability_dual_path(profile, modes, lattice):
    sv = solvability_average(profile, lattice, KernelModeSet(0.0, modes))
    assert sv.max_abs > 1e-3
    assert sv.rel_error <= 1e-7


def test_solvability_vanishes(uniform, affine, lattice):
    sv = solvability_average(uniform, lattice, KernelModeSet(0.0, {(1, 1): 1.0}))
    assert sv.max_abs <= 1e-9
    sv = solvability_average(affine, lattice, KernelModeSet(0.0, {(1, 0): 1.0}))
    assert sv.max_abs <= 1e-9


def test_sampled_profile_dual_path(lattice):
    x = np.linspace(-1, 0, 41)
    prof = ShearProfile.samples(x, 1.5 + 0.3 * np.sin(2 * x))
    sv = solvability_average(prof, lattice, KernelModeSet(0.0, {(1, 1): 1.0}), VerticalGrid.chebyshev(1.0, 41))
    assert sv.rel_error <= 1e-7


def test_f_matches_derivative(affine, lattice):
    pf = obstruction_f(affine, lattice, KernelModeSet(0.0, {(1, 1): 1.0, (2, 1): 0.5}))
    assert pf.fd_check() <= 1e-6
    assert pf.Uprime_f == pytest.approx(pf.f)  # U' = 1


def test_f_of_2d_amplitudes_is_zero(affine, lattice):
    pf = obstruction_f(affine, lattice, KernelModeSet(0.3, {(1, 0): 1.0}))
    assert np.all(pf.f == 0) and np.all(pf.df == 0)
    assert not pf.has_3d and pf.positivity_delta() == 0.0


def test_f_positive_near_bottom(lattice):
    for prof in (CUBIC, ShearProfile.poly([3.0, -2.0], 1.0), ShearProfile.poly([-2.0, 0.0, 0.5], 1.0)):
        pf = obstruction_f(prof, lattice, KernelModeSet(0.0, {(1, 1): 1.0}))
        assert pf.positivity_delta() > 0
        assert pf.df[0] == 0.0  # q(-d) = 0


@given(st.floats(0.1, 5.0))
def test_f_homogeneous(c):
    lat = LatticeSpec(2 * math.pi, 2 * math.pi)
    amps = KernelModeSet(0.0, {(1, 1): 1.0, (1, 2): -0.3})
    a = obstruction_f(CUBIC, lat, amps)
    b = obstruction_f(CUBIC, lat, amps.scaled(c))
    assert np.allclose(b.f, c * c * a.f, rtol=1e-12, atol=1e-14)


def test_per_mode_breakdown_sums(affine, lattice):
    pf = obstruction_f(affine, lattice, KernelModeSet(0.0, {(1, 1): 1.0, (2, 3): 0.2}))
    assert set(pf.contributions) == {(1, 1), (2, 3)}
    assert np.allclose(sum(pf.contributions.values()), pf.f)
    assert np.allclose(sum(pf.dcontributions.values()), pf.df)


def test_verdicts(uniform, affine, lattice):
    p = calibrated(uniform, 0.5, lattice, (1, 1))
    v = theorem_verdict(uniform, p, lattice, KernelModeSet(0.0, {(1, 1): 1.0}))
    assert v.classification == UNIFORM_FLOW and v.max_abs_Uprime_f <= 1e-12

    p = calibrated(affine, 1.0, lattice, (1, 0))
    v = theorem_verdict(affine, p, lattice, KernelModeSet(0.0, {(1, 0): 1.0}))
    assert v.classification == KERNEL_2D_ONLY

    p = calibrated(affine, 1.0, lattice, (1, 1))
    v = theorem_verdict(affine, p, lattice, KernelModeSet(0.0, {(1, 1): 1.0}))
    assert v.classification == OBSTRUCTED_3D
    assert v.ratio > 0.01 and v.max_abs_Uprime_f > 0 and v.positivity_delta > 0
    d = v.to_dict()
    assert d["classification"] == OBSTRUCTED_3D and "1,1" in d["contributions"]


def test_verdict_defaults_to_all_resonant_modes(affine, lattice):
    p = calibrated(affine, 1.0, lattice, (1, 1))
    assert theorem_verdict(affine, p, lattice).classification == OBSTRUCTED_3D


def test_verdict_empty_set_is_2d(affine, lattice):
    from shearwave.profiles import WaveParams
    v = theorem_verdict(affine, WaveParams(1.0, 0.77), lattice)
    assert v.classification == KERNEL_2D_ONLY and len(v.resonant) == 0


def test_verdict_rejects_nonresonant(affine, lattice):
    p = calibrated(affine, 1.0, lattice, (1, 1))
    with pytest.raises(NonResonantMode):
        theorem_verdict(affine, p, lattice, KernelModeSet(0.0, {(2, 2): 1.0}))


def test_inconclusive_when_threshold_unreachable(affine, lattice):
    p = calibrated(affine, 1.0, lattice, (1, 1))
    v = theorem_verdict(affine, p, lattice, KernelModeSet(0.0, {(1, 1): 1.0}), threshold=2.0)
    assert v.classification == INCONCLUSIVE
