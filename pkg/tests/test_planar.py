"""Planar Newton solver: projections, both branches, symmetry, families."""
import json
import math

import numpy as np
import pytest

from laneemden.geometry import build_planar_grid, rectangle, unit_disk
from laneemden.planar import (PlanarField, continue_in_p, nehari_project,
                              nodal_nehari_project, operators, solve_nodal,
                              solve_positive)
from laneemden.radial import predicted_scale, solve_radial
from laneemden.spectrum import morse_index_planar

SQRT_E = 1.6487212707001281
EIGHT_PI_E = 68.317873781388537
LAMBDA1_DISK = 5.7831859629467845
LAMBDA1_SQUARE = 2.0 * math.pi ** 2

RNG = np.random.default_rng(7)


@pytest.fixture(scope="module")
def square3():
    return solve_positive(3.0, grid=build_planar_grid(rectangle(1.0, 1.0), 65))


@pytest.fixture(scope="module")
def disk3():
    return solve_positive(3.0)


@pytest.fixture(scope="module")
def tower10():
    return solve_nodal(10.0, symmetry=8, init="tower")


@pytest.fixture(scope="module")
def towers(tower10):
    return [tower10] + [solve_nodal(p, symmetry=8, init="tower")
                        for p in (20.0, 40.0)]


@pytest.fixture(scope="module")
def square5():
    return solve_nodal(5.0, domain=rectangle(1.0, 1.0), init="eigen")


@pytest.fixture(scope="module")
def eigen10():
    return solve_nodal(10.0, domain=rectangle(1.0, 1.0), init="eigen")


# ---------------------------------------------------------------------------
# Nehari projections

def _smooth_square_field(grid, odd=False):
    nx, ny = grid.shape
    xs = grid.h * (1 + np.arange(nx))[:, None]
    ys = grid.h * (1 + np.arange(ny))[None, :]
    v = (np.sin(np.pi * xs / (grid.h * (nx + 1)))
         * np.sin(np.pi * ys / (grid.h * (ny + 1))))
    v = v + 0.4 * np.sin(2 * np.pi * xs) * np.sin(3 * np.pi * ys)
    if odd:
        v = v - v.T
    return v


def test_nehari_projection_identity_and_invariance():
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    K, area = operators(grid)
    p = 3.0
    v = _smooth_square_field(grid)
    w = nehari_project(grid, v, p)
    wf = w.ravel()
    dirichlet = float(wf @ (K @ wf))
    mass = float(np.sum(area * np.abs(wf) ** (p + 1)))
    assert dirichlet == pytest.approx(mass, rel=1e-12)
    # fixed point and scale invariance
    again = nehari_project(grid, w, p)
    assert np.allclose(again, w, rtol=1e-12, atol=1e-12 * np.abs(w).max())
    doubled = nehari_project(grid, 2.0 * v, p)
    assert np.allclose(doubled, w, rtol=1e-12, atol=1e-12 * np.abs(w).max())


def test_nehari_projection_rejects_zero():
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    with pytest.raises(ValueError):
        nehari_project(grid, np.zeros(grid.shape), 3.0)


def test_nodal_projection_identities():
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    K, area = operators(grid)
    p = 4.0
    v = _smooth_square_field(grid) - 0.7
    w = nodal_nehari_project(grid, v, p)
    wf = w.ravel()
    src = area * np.abs(wf) ** (p - 1) * wf
    scale = float(wf @ (K @ wf))
    for part in (np.clip(wf, 0.0, None), np.clip(wf, None, 0.0)):
        defect = float(part @ (K @ wf)) - float(src @ part)
        assert abs(defect) <= 1e-12 * scale
    # already projected: both factors are one
    again = nodal_nehari_project(grid, w, p)
    assert np.allclose(again, w, rtol=1e-12, atol=1e-12 * np.abs(w).max())


def test_nodal_projection_antisymmetric_equal_factors():
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    v = _smooth_square_field(grid, odd=True)
    w = nodal_nehari_project(grid, v, 5.0)
    pos, neg = v > 0, v < 0
    fpos = w[pos] / v[pos]
    fneg = w[neg] / v[neg]
    assert np.ptp(fpos) <= 1e-10 * fpos.mean()
    assert np.ptp(fneg) <= 1e-10 * fneg.mean()
    assert fpos.mean() == pytest.approx(fneg.mean(), rel=1e-10)


def test_nodal_projection_rejects_one_signed():
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    with pytest.raises(ValueError):
        nodal_nehari_project(grid, np.ones(grid.shape), 3.0)


# ---------------------------------------------------------------------------
# positive branch

def test_square_positive_center_max(square3):
    V = square3.values
    assert V.shape == (63, 63)
    assert np.unravel_index(np.argmax(V), V.shape) == (31, 31)
    sup = V.max()
    assert np.max(np.abs(V - V.T)) <= 1e-12 * sup
    assert np.max(np.abs(V - V[::-1])) <= 1e-12 * sup
    assert np.max(np.abs(V - V[:, ::-1])) <= 1e-12 * sup
    assert V.min() > 0.0
    assert square3.residual() <= 1e-9
    assert square3.metadata["branch"] == "positive"


def test_disk_positive_matches_radial(disk3, solutions):
    rad = solutions.get(3.0)
    prof = disk3.values[:, 0]
    rel = np.max(np.abs(prof - rad.u(disk3.grid.rings))) / rad.center_value
    assert rel < 0.02
    # discrete rotational symmetry comes out exact on the polar grid
    assert np.max(np.abs(disk3.values - disk3.values[:, :1])) < 1e-12


def test_interpolation_tracks_radial(disk3, solutions):
    rad = solutions.get(3.0)
    pts = np.array([[0.0, 0.0], [0.3, 0.2], [-0.55, 0.4], [0.95, 0.0]])
    got = disk3.interpolate(pts)
    want = rad.u(np.hypot(pts[:, 0], pts[:, 1]))
    assert np.max(np.abs(got - want)) < 1e-2


def test_grid_convergence_is_second_order():
    energies = []
    for res in (33, 65, 129):
        g = build_planar_grid(rectangle(1.0, 1.0), res)
        f = solve_positive(3.0, grid=g)
        energies.append(f.energy_terms()["p_dirichlet"])
    ratio = (energies[0] - energies[1]) / (energies[1] - energies[2])
    assert 3.5 <= ratio <= 4.5


def test_autofocused_large_p_positive(disk3):
    frozen = {20.0: 59.2547, 40.0: 61.4290}   # radial values, same quantity
    fields = {p: solve_positive(p) for p in frozen}
    for p, f in fields.items():
        assert f.residual() <= 1e-9
        assert f.energy_terms()["p_dirichlet"] == pytest.approx(frozen[p],
                                                                rel=1e-2)
    sups = [disk3.values.max()] + [fields[p].values.max() for p in (20.0, 40.0)]
    gaps = [abs(s - SQRT_E) for s in sups]
    assert gaps[0] > gaps[1] > gaps[2]
    assert fields[40.0].energy_terms()["p_dirichlet"] > \
        fields[20.0].energy_terms()["p_dirichlet"]


# ---------------------------------------------------------------------------
# invariants shared by every converged field

def test_no_vanishing_and_nehari_identity(square3, disk3, tower10, square5):
    lam = {"rectangle": LAMBDA1_SQUARE, "disk": LAMBDA1_DISK}
    for f in (square3, disk3, tower10, square5):
        sup = float(np.abs(f.values).max())
        assert sup ** (f.p - 1.0) >= 0.95 * lam[f.grid.domain.kind]
        et = f.energy_terms()
        assert abs(et["p_dirichlet"] - et["p_mass_p1"]) <= 1e-6 * et["p_dirichlet"]


def test_energy_sign_split_sums(square5):
    et = square5.energy_terms()
    assert et["dirichlet_pos"] + et["dirichlet_neg"] == pytest.approx(
        et["p_dirichlet"], rel=1e-10)
    assert et["mass_p1_pos"] + et["mass_p1_neg"] == pytest.approx(
        et["p_mass_p1"], rel=1e-10)
    # antisymmetric state: the two halves carry the same energy
    assert et["dirichlet_pos"] == pytest.approx(et["dirichlet_neg"], rel=1e-8)


def test_operator_is_symmetric_energy_form(disk3):
    K, area = operators(disk3.grid)
    gap = K - K.T
    assert np.max(np.abs(gap.data)) if gap.nnz else 0.0 <= 1e-14
    assert np.all(area > 0.0)
    u = disk3.values.ravel()
    assert disk3.p * float(u @ (K @ u)) == pytest.approx(
        disk3.energy_terms()["p_dirichlet"], rel=1e-12)


# ---------------------------------------------------------------------------
# nodal branch

def test_tower_nodal_circle_matches_radial(tower10, solutions):
    rad = solutions.get(10.0, k=1)
    md = tower10.metadata["nodal"]
    assert not md["touches_boundary"]
    assert md["clearance"] > 0.0
    assert md["reach"] == pytest.approx(rad.zeros[0], abs=5e-4)
    prof = tower10.values[:, 0]
    rel = np.max(np.abs(prof - rad.u(tower10.grid.rings))) / rad.center_value
    assert rel < 1e-2


def test_tower_symmetry_enforced(tower10):
    V = tower10.values
    nt = V.shape[1]
    assert tower10.metadata["symmetry"] == 8
    rolled = np.roll(V, nt // 8, axis=1)
    assert np.max(np.abs(rolled - V)) <= 1e-8 * np.abs(V).max()


def test_tower_shrinks_with_p(towers):
    reaches = [f.metadata["nodal"]["reach"] for f in towers]
    assert reaches[0] > reaches[1] > reaches[2]
    for f in towers:
        assert not f.metadata["nodal"]["touches_boundary"]
        assert f.metadata["nodal"]["clearance"] > 0.0
        assert f.residual() <= 1e-9


def test_tower_energy_quantization(towers):
    # p-weighted Dirichlet energy decreases toward the two-bubble level,
    # entering the sub-5x8pie regime by the top of the ladder
    pd = [f.energy_terms()["p_dirichlet"] for f in towers]
    assert pd[0] > pd[1] > pd[2]
    assert pd[2] < 5.0 * EIGHT_PI_E


def test_eigen_square_nodal_line_reaches_boundary(eigen10):
    md = eigen10.metadata
    assert md["nodal"]["touches_boundary"]
    assert md["staged_from"] == 3.0
    V = eigen10.values
    assert np.max(np.abs(V + V.T)) <= 1e-8 * np.abs(V).max()
    assert eigen10.residual() <= 1e-9


def test_morse_index_square_nodal_is_two(square5):
    out = morse_index_planar(square5)
    assert out["count"] == 2


def test_morse_index_positive_is_one(disk3):
    assert morse_index_planar(disk3)["count"] == 1


def test_morse_index_tower(tower10):
    # full planar pencil at the symmetric tower reproduces the radial
    # decomposition count: 1 + 1 + 2 + 2*4 on the disk
    assert morse_index_planar(tower10)["count"] == 12


# ---------------------------------------------------------------------------
# continuation

def test_positive_family_approaches_limit():
    base = solve_positive(3.0)
    family = continue_in_p(base, 12.0)
    tail = family[-1].metadata["continuation"]
    assert tail["complete"] and tail["reached"] == 12.0
    sups = [float(f.values.max()) for f in family]
    gaps = [abs(s - SQRT_E) for s in sups]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    for f in family:
        assert f.residual() <= 1e-9
        assert f.values.min() > 0.0


def test_tower_family_nodal_set_shrinks(tower10):
    family = continue_in_p(tower10, 13.0)
    assert family[-1].metadata["continuation"]["complete"]
    ratios = [f.metadata["nodal"]["reach"]
              / predicted_scale(f.p, float(f.values.min())) for f in family]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    for f in family[1:]:
        assert f.sign_changing
        assert f.metadata["residual"] <= 1e-9


def test_continuation_validation(disk3):
    with pytest.raises(ValueError):
        continue_in_p(disk3, 2.0)
    with pytest.raises(ValueError):
        continue_in_p(disk3, 6.0, schedule=[4.0, 5.0])
    with pytest.raises(ValueError):
        continue_in_p(disk3, 80.0)


# ---------------------------------------------------------------------------
# serialization and validation

def test_serialization_round_trip(tower10):
    d = json.loads(json.dumps(tower10.to_dict()))
    back = PlanarField.from_dict(d)
    assert back.p == tower10.p
    assert back.grid.shape == tower10.grid.shape
    assert np.array_equal(back.values, tower10.values)
    assert back.metadata == tower10.metadata
    with pytest.raises(ValueError):
        PlanarField.from_dict({"kind": "radial-solution"})


def test_residual_flags_perturbation(disk3):
    assert disk3.residual() <= 1e-9
    bumped = disk3.values.copy()
    bumped[len(bumped) // 2] += 1e-3
    worse = PlanarField(disk3.grid, disk3.p, bumped)
    assert worse.residual() > 1e-6


def test_solver_validation():
    with pytest.raises(ValueError):
        solve_positive(1.0)
    with pytest.raises(ValueError):
        solve_positive(60.0)
    with pytest.raises(ValueError):
        solve_nodal(5.0, init="bogus")
    with pytest.raises(ValueError):
        solve_nodal(5.0, symmetry=0)
    with pytest.raises(ValueError):
        solve_nodal(5.0, symmetry=7)          # 64 angles, not divisible
    with pytest.raises(ValueError):
        solve_nodal(5.0, grid=build_planar_grid(rectangle(1.0, 1.0), 33),
                    symmetry=4)               # rotations need a polar grid
    with pytest.raises(ValueError):
        solve_positive(3.0, init=np.ones(5))
