import json
import math

import numpy as np
import pytest

from laneemden.geometry import annulus, rectangle, unit_disk
from laneemden.radial import (RadialSolution, SolverError, _powsgn, shoot,
                              solve_radial, radial_energy, predicted_scale)

# center values pinned by two independent discretizations (adaptive RK
# shooting at rtol 1e-12 and Newton collocation at tol 1e-11), which agree
# to ~1e-11 relative on these cases
U0 = {
    3: 3.5739009823,
    50: 1.6476320953,
    100: 1.6382195307,
}
U0_NODAL_100 = 2.487265034


@pytest.fixture(scope="module")
def positive_100():
    return solve_radial(100)


@pytest.fixture(scope="module")
def nodal_100():
    return solve_radial(100, k=1)


def test_powsgn_matches_powers():
    v = np.array([-2.0, -0.5, 0.0, 0.3, 1.7])
    np.testing.assert_allclose(_powsgn(v, 3.0), v ** 3, rtol=1e-13)
    # huge exponents neither overflow nor lose the sign
    assert _powsgn(1e-3, 401.0) == 0.0 or _powsgn(1e-3, 401.0) > 0.0
    assert _powsgn(-1.2, 999.0) < 0.0
    assert np.isfinite(_powsgn(2.0, 999.0))


def test_shoot_records_boundary_value_and_zeros():
    tr = shoot(10.0, 2.0)
    assert tr.frame == "log"
    assert tr.zeros.size >= 1          # overshoots: crossed at least once
    tr_small = shoot(10.0, 1.05)
    assert tr_small.zeros.size == 0
    assert tr_small.boundary_value > 0.0


def test_shoot_odd_symmetry():
    up = shoot(10.0, 2.0).u(0.5)
    dn = shoot(10.0, -2.0).u(0.5)
    assert dn == pytest.approx(-up, rel=1e-12)


def test_shoot_validation():
    with pytest.raises(ValueError):
        shoot(1.0, 2.0)
    with pytest.raises(ValueError):
        shoot(10.0, 0.0)


def test_center_values_match_references():
    for p, want in U0.items():
        sol = solve_radial(p)
        assert sol.center_value == pytest.approx(want, abs=2e-9), p
        assert sol.nodal_count == 0
        assert sol.zeros.size == 0


def test_two_discretizations_agree(positive_100):
    assert positive_100.diagnostics["shoot_vs_collocation"] < 1e-8
    assert positive_100.diagnostics["boundary_residual"] < 1e-10


def test_energy_identity(positive_100):
    en = radial_energy(positive_100)
    assert en["p_dirichlet"] == pytest.approx(en["p_mass_p1"], rel=1e-9)
    assert en["pE"] == pytest.approx(
        (0.5 - 1.0 / 101.0) * en["p_dirichlet"], rel=1e-13)
    # the scaled Dirichlet energy sits on the known shelf below 8 pi e
    assert 60.0 < en["p_dirichlet"] < 8.0 * math.pi * math.e


def test_solution_samples_center_series(positive_100):
    sol = positive_100
    a = sol.center_value
    assert sol.u(0.0) == pytest.approx(a, rel=1e-12)
    # inside the concentration scale the profile is flat to second order
    mu = predicted_scale(sol.p, a)
    assert sol.u(mu * 1e-3) == pytest.approx(a, rel=1e-5)
    assert sol.du(0.0) == 0.0
    # boundary behavior: u(1) = 0, u'(1) < 0
    assert abs(sol.u(1.0)) < 1e-9
    assert sol.du(1.0) < 0.0


def test_nodal_structure(nodal_100):
    sol = nodal_100
    assert sol.nodal_count == 1
    assert sol.zeros.size == 1
    assert sol.center_value == pytest.approx(U0_NODAL_100, abs=2e-8)
    rz = sol.zeros[0]
    assert 0.0 < rz < 1.0
    # negative shell beyond the zero
    r = np.geomspace(rz * 1.01, 0.99, 100)
    assert np.all(sol.u(r) <= 0.0)
    assert np.min(sol.u(np.geomspace(1e-10, 1.0, 4000))) < -1.0


def test_nodal_energy_splits(nodal_100):
    en = radial_energy(nodal_100)
    assert en["p_dirichlet"] == pytest.approx(en["p_mass_p1"], rel=1e-8)
    assert en["dirichlet_pos"] > 0 and en["dirichlet_neg"] > 0
    assert en["dirichlet_pos"] + en["dirichlet_neg"] == pytest.approx(
        en["p_dirichlet"], rel=1e-12)
    assert en["mass_p1_pos"] + en["mass_p1_neg"] == pytest.approx(
        en["p_mass_p1"], rel=1e-12)


def test_second_excited_state():
    sol = solve_radial(5, k=2)
    assert sol.nodal_count == 2
    assert sol.zeros.size == 2
    assert sol.zeros[0] < sol.zeros[1]
    assert sol.center_value == pytest.approx(8.246972728, abs=1e-7)


def test_annulus_positive():
    sol = solve_radial(5, 0, annulus(0.5))
    assert sol.center_value is None
    assert sol.mesh.nodes[0] == 0.5
    assert sol.diagnostics["boundary_residual"] < 1e-10
    assert sol.diagnostics["shoot_vs_collocation"] < 1e-8
    assert sol.sup_norm == pytest.approx(2.900559, abs=1e-5)
    en = radial_energy(sol)
    assert en["p_dirichlet"] == pytest.approx(en["p_mass_p1"], rel=1e-8)


def test_annulus_nodal():
    sol = solve_radial(5, 1, annulus(0.5))
    assert sol.nodal_count == 1
    assert 0.5 < sol.zeros[0] < 1.0


def test_validation_errors():
    with pytest.raises(ValueError):
        solve_radial(0.5)
    with pytest.raises(ValueError):
        solve_radial(10, k=3)
    with pytest.raises(ValueError):
        solve_radial(10, domain=rectangle(2.0, 1.0))
    with pytest.raises(ValueError):
        solve_radial(2000.0)


def test_serialization_round_trip(nodal_100):
    d = nodal_100.to_dict()
    blob = json.dumps(d)
    back = RadialSolution.from_dict(json.loads(blob))
    assert back.to_dict() == d
    assert back.p == nodal_100.p
    assert back.nodal_count == 1
    r = np.linspace(0.0, 1.0, 513)
    got = np.asarray(back.u(r))
    want = np.asarray(nodal_100.u(r))
    assert np.max(np.abs(got - want)) < 1e-5


def test_predicted_scale():
    # p |a|^{p-1} mu^2 = 1 by construction
    mu = predicted_scale(100.0, 1.64)
    assert 100.0 * 1.64 ** 99 * mu * mu == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        predicted_scale(100.0, 0.0)
