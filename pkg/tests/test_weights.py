import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weighted_robin.weights import (BallSpec, ProfileError, ball_gamma_volume, built_in_profiles,
                                    gauss_profile, parse_profile, radius_for_volume, unit_sphere_area)


def test_parse_round_trip():
    for p in built_in_profiles():
        assert parse_profile(p.spec).spec == p.spec


@pytest.mark.parametrize("bad", ["", "cubic:1", "linear", "linear:-1", "quadlin:1", "linear:x", "linear:nan"])
def test_parse_rejects(bad):
    with pytest.raises(ProfileError):
        parse_profile(bad)


def test_built_ins_valid():
    for p in built_in_profiles():
        assert p.is_valid()
    assert not gauss_profile().is_valid()
    assert gauss_profile().exploratory


def test_strict_flag():
    flags = {p.spec: p.strictly_increasing() for p in built_in_profiles()}
    assert flags == {"zero": False, "linear:1": True, "quadratic:1": True, "quadlin:0.5,0.5": True}


def test_derivatives_consistent():
    r = np.linspace(0.1, 3, 50)
    d = 1e-6
    for p in built_in_profiles():
        fd = (p.h(r + d) - p.h(r - d)) / (2 * d)
        assert np.allclose(fd, p.h_prime(r), atol=1e-7)
        fd2 = (p.h_prime(r + d) - p.h_prime(r - d)) / (2 * d)
        assert np.allclose(fd2, p.h_double_prime(r), atol=1e-7)


def test_sphere_areas():
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)


def test_volume_closed_forms():
    z = parse_profile("zero")
    assert ball_gamma_volume(z, BallSpec(2, 1.3)) == pytest.approx(math.pi * 1.3**2, rel=1e-12)
    # e^{r}: 2 pi int_0^R r e^r dr = 2 pi ((R - 1) e^R + 1)
    lin = parse_profile("linear:1")
    R = 0.7
    assert ball_gamma_volume(lin, BallSpec(2, R)) == pytest.approx(2 * math.pi * ((R - 1) * math.exp(R) + 1), rel=1e-12)
    # e^{r^2/2}: 2 pi (e^{R^2/2} - 1)
    q = parse_profile("quadratic:1")
    assert ball_gamma_volume(q, BallSpec(2, R)) == pytest.approx(2 * math.pi * (math.exp(R * R / 2) - 1), rel=1e-12)


def test_ballspec_validation():
    with pytest.raises(ValueError):
        BallSpec(1, 1.0)
    with pytest.raises(ValueError):
        BallSpec(2, 0.0)


@given(st.sampled_from(built_in_profiles()), st.sampled_from([2, 3]), st.floats(0.05, 5.0))
def test_radius_for_volume_inverts(profile, m, R):
    v = ball_gamma_volume(profile, BallSpec(m, R))
    assert radius_for_volume(profile, m, v) == pytest.approx(R, rel=1e-10)


def test_radius_for_volume_rejects_nonpositive():
    with pytest.raises(ValueError):
        radius_for_volume(parse_profile("zero"), 2, 0.0)
