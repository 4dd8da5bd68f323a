import math

import numpy as np
import pytest

from laneemden.profiles import (EIGHT_PI, SingularProfileParams, singular_params,
                                regular_bubble, regular_slope, singular_bubble,
                                singular_slope, _singular_curvature, regular_mass,
                                singular_mass, liouville_residual, bubble_tower)

# reference values for the ell = 1 singular profile, computed independently
# from alpha = sqrt(2 ell^2 + 4) and beta = ell ((alpha+2)/(alpha-2))^(1/alpha)
ALPHA_1 = 2.4494897427831781       # sqrt(6)
BETA_1 = 2.5494593322058266
ETA_1 = 0.22474487139158905        # alpha/2 - 1
DIRAC_1 = -2.8242273475831962      # -2 pi (alpha - 2)


def test_singular_params_ell_one():
    q = singular_params(1.0)
    assert q.alpha == pytest.approx(ALPHA_1, abs=1e-15)
    assert q.beta == pytest.approx(BETA_1, abs=1e-14)
    assert q.eta == pytest.approx(ETA_1, abs=1e-15)
    assert q.dirac_coeff == pytest.approx(DIRAC_1, abs=1e-13)


def test_singular_params_validation():
    with pytest.raises(ValueError):
        singular_params(0.0)
    with pytest.raises(ValueError):
        singular_params(-2.0)
    with pytest.raises(ValueError):
        SingularProfileParams(1.0, 1.5, 1.0, 0.0, 0.0)   # alpha must exceed 2


def test_regular_bubble_values():
    # peak value 0 at the origin, -2 log 2 at r = sqrt(8)
    assert regular_bubble(0.0) == 0.0
    assert regular_bubble(math.sqrt(8.0)) == pytest.approx(-2.0 * math.log(2.0), abs=1e-15)
    r = np.geomspace(1e-3, 1e3, 11)
    np.testing.assert_allclose(regular_bubble(r), -2.0 * np.log1p(r * r / 8.0), rtol=1e-15)


def test_singular_profile_peaks_at_ell():
    # V(ell) = 0 and V'(ell) = 0: the profile peaks exactly at radius ell
    for ell in (0.1, 0.5, 1.0, 2.0, 5.0):
        q = singular_params(ell)
        assert abs(singular_bubble(ell, q)) < 1e-10
        assert abs(singular_slope(ell, q)) < 1e-10
        # strictly below zero elsewhere
        r = np.array([ell / 3.0, ell * 3.0])
        assert np.all(singular_bubble(r, q) < -1e-3)


def test_masses():
    assert regular_mass() == pytest.approx(EIGHT_PI, rel=1e-8)
    for ell in (0.1, 0.5, 1.0, 2.0, 5.0):
        q = singular_params(ell)
        want = 4.0 * math.pi * q.alpha
        assert singular_mass(q) == pytest.approx(want, rel=1e-8), ell
        # equivalently 8 pi (1 + eta)
        assert want == pytest.approx(EIGHT_PI * (1.0 + q.eta), rel=1e-14)


def test_liouville_residual_regular():
    r = np.geomspace(1e-3, 1e3, 400)
    assert np.max(np.abs(liouville_residual(r))) < 1e-10


@pytest.mark.parametrize("ell", [1.0, 2.0])
def test_liouville_residual_singular(ell):
    r = np.geomspace(1e-3, 1e3, 400)
    q = singular_params(ell)
    assert np.max(np.abs(liouville_residual(r, q))) < 1e-10


def test_singular_curvature_matches_finite_differences():
    q = singular_params(1.3)
    h = 1e-4                 # roundoff in the second difference is ~1e-16/h^2
    for r in (0.3, 1.0, 2.7):
        fd = (singular_bubble(r + h, q) - 2.0 * singular_bubble(r, q)
              + singular_bubble(r - h, q)) / h ** 2
        assert _singular_curvature(r, q) == pytest.approx(fd, abs=1e-6)


def test_singular_slope_matches_finite_differences():
    q = singular_params(0.7)
    h = 1e-6
    for r in (0.2, 0.7, 3.1):
        fd = (singular_bubble(r + h, q) - singular_bubble(r - h, q)) / (2.0 * h)
        assert singular_slope(r, q) == pytest.approx(fd, abs=1e-8)


def test_singular_bubble_far_field():
    # V ~ -(alpha + 2) log r + const as r -> inf, ~ (alpha - 2) log r down the core
    q = singular_params(1.0)
    s1 = (singular_bubble(2e5, q) - singular_bubble(1e5, q)) / math.log(2.0)
    assert s1 == pytest.approx(-(q.alpha + 2.0), abs=1e-3)
    s0 = (singular_bubble(2e-5, q) - singular_bubble(1e-5, q)) / math.log(2.0)
    assert s0 == pytest.approx(q.alpha - 2.0, abs=1e-3)


def test_singular_bubble_rejects_origin():
    q = singular_params(1.0)
    with pytest.raises(ValueError):
        singular_bubble(0.0, q)


def test_bubble_tower_shape():
    r = np.geomspace(1e-12, 10.0, 2000)
    y = bubble_tower(r, 2.0, 1e-6, 1.2, 1e-3)
    assert bubble_tower(0.0, 2.0, 1e-6, 1.2, 1e-3) == pytest.approx(2.0)
    assert y.min() < -0.5          # the negative shell is present
    assert y.max() == pytest.approx(2.0, rel=1e-6)
    assert abs(y[-1]) < 1e-12      # compact support
    # one sign change along the ray
    assert np.count_nonzero(np.diff(np.sign(y[np.abs(y) > 1e-14])) != 0) == 1


def test_bubble_tower_validation():
    with pytest.raises(ValueError):
        bubble_tower(1.0, 1.0, 0.0, 1.0, 1e-3)
