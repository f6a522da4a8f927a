import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shearwave.errors import ParameterError, ProfileError
from shearwave.profiles import (LatticeSpec, ShearProfile, WaveParams, logderiv_extrema,
                                require_zero_free, validate_profile)


def test_constant_profile_is_zero_free_and_constant(uniform):
    rep = validate_profile(uniform, 64)
    assert rep.zero_free and rep.constant
    assert rep.min_abs == rep.max_abs == 1.0


def test_affine_profile_range(affine):
    rep = validate_profile(affine)
    assert rep.zero_free and not rep.constant
    assert rep.min_abs == pytest.approx(1.0, abs=1e-12)
    assert rep.max_abs == pytest.approx(2.0, abs=1e-12)


def test_zero_located():
    rep = validate_profile(ShearProfile.poly([0.5, 1.0], 1.0))
    assert not rep.zero_free
    assert rep.zero_location == pytest.approx(-0.5, abs=1e-10)
    with pytest.raises(ProfileError, match="vanishes"):
        require_zero_free(ShearProfile.poly([0.5, 1.0], 1.0))


def test_double_root_is_caught():
    # (x + 0.3)^2 touches zero without a sign change
    rep = validate_profile(ShearProfile.poly([0.09, 0.6, 1.0], 1.0))
    assert not rep.zero_free


@pytest.mark.parametrize("depth", [0.0, -1.0, float("nan")])
def test_bad_depth(depth):
    with pytest.raises(ProfileError):
        ShearProfile.poly([1.0], depth)


def test_short_samples_rejected():
    with pytest.raises(ProfileError, match="at least 4"):
        ShearProfile.samples([-1.0, -0.5, 0.0], [1.0, 1.0, 1.0])


def test_samples_must_span_depth():
    with pytest.raises(ProfileError):
        ShearProfile.samples([-1.0, -0.5, -0.2, -0.1], [1, 1, 1, 1])


def test_low_resolution_rejected(uniform):
    with pytest.raises(ParameterError):
        validate_profile(uniform, 8)


def test_logderiv_extrema_examples(uniform, affine):
    assert logderiv_extrema(uniform) == (0.0, 0.0)
    lo, hi = logderiv_extrema(affine)
    assert lo == pytest.approx(0.5, abs=1e-12)
    assert hi == pytest.approx(1.0, abs=1e-12)


def test_logderiv_extrema_exponential_samples():
    x = np.linspace(-1.0, 0.0, 401)
    lo, hi = logderiv_extrema(ShearProfile.samples(x, np.exp(x)))
    assert lo == pytest.approx(1.0, abs=1e-4)
    assert hi == pytest.approx(1.0, abs=1e-4)


def test_interior_extremum_refined():
    # U'/U peaks inside the interval; compare with a dense scan
    p = ShearProfile.poly([1.16, 0.8, 1.0], 1.0)
    x = np.linspace(-1, 0, 200001)
    r = p.logderiv(x)
    lo, hi = logderiv_extrema(p)
    assert lo == pytest.approx(r.min(), abs=1e-9)
    assert hi == pytest.approx(r.max(), abs=1e-9)


@given(st.lists(st.floats(-0.3, 0.3), min_size=3, max_size=3), st.floats(1.0, 3.0),
       st.floats(-5.0, 5.0).filter(lambda c: abs(c) > 0.1))
def test_extrema_scale_invariant(tail, base, c):
    p = ShearProfile.poly([base] + tail, 1.0)
    a = logderiv_extrema(p)
    b = logderiv_extrema(p.scaled(c))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    x = np.linspace(-1, 0, 257)
    r = p.logderiv(x)
    assert np.all(r >= a[0] - 1e-12) and np.all(r <= a[1] + 1e-12)


def test_profile_roundtrip_and_key(affine):
    again = ShearProfile.from_dict(affine.to_dict())
    assert again.key == affine.key
    x = np.linspace(-1, 0, 5)
    s = ShearProfile.samples(x, 2 + x)
    assert ShearProfile.from_dict(s.to_dict()).key == s.key
    assert s.key != affine.key


def test_ppoly_matches_profile(affine):
    breaks, c, dc = affine.ppoly()
    x = np.linspace(-1, 0, 11)
    t = x - breaks[0]
    assert np.allclose(np.polyval(c[:, 0], t), affine(x), atol=1e-14)
    assert np.allclose(np.polyval(dc[:, 0], t), affine.d1(x), atol=1e-14)


def test_spline_ppoly_matches():
    x = np.linspace(-2.0, 0.0, 9)
    p = ShearProfile.samples(x, 1.5 + np.sin(x))
    breaks, c, dc = p.ppoly()
    z = np.linspace(-2, 0, 101)
    idx = np.clip(np.searchsorted(breaks, z, side="right") - 1, 0, breaks.size - 2)
    vals = [np.polyval(c[:, i], zz - breaks[i]) for zz, i in zip(z, idx)]
    dvals = [np.polyval(dc[:, i], zz - breaks[i]) for zz, i in zip(z, idx)]
    assert np.allclose(vals, p(z), atol=1e-13)
    assert np.allclose(dvals, p.d1(z), atol=1e-13)


def test_lattice_derived_wavenumbers():
    lat = LatticeSpec(3.0, 0.5)
    assert lat.kappa1 * lat.lambda1 == pytest.approx(2 * math.pi, rel=1e-15)
    assert lat.k(2, -1) == (2 * lat.kappa1, -lat.kappa2)
    assert LatticeSpec.from_dict(lat.to_dict()) == lat
    with pytest.raises(ParameterError):
        LatticeSpec(0.0, 1.0)


def test_wave_params():
    p = WaveParams(1.0, 0.5)
    assert p.symbol(2.0) == 2.0
    with pytest.raises(ParameterError):
        WaveParams(-1.0, 0.5)
    with pytest.raises(ParameterError):
        WaveParams(1.0, 0.0)
    h = WaveParams.polynomial_symbol(1.0, [1.0, 0.0, 0.1])
    assert h.symbol(2.0) == pytest.approx(1.4)
    assert not h.capillary
    bad = WaveParams(1.0, None, dynamic=lambda s: -1.0)
    with pytest.raises(ParameterError):
        bad.symbol(1.0)
