"""Concentration analysis: rescaling, bubble fits, point extraction."""
import math

import numpy as np
import pytest

from laneemden.asymptotics import (
    EIGHT_PI_E, BubbleFit, ConcentrationReport, RescaledProfile,
    energy_report, extract_concentration_points, fit_bubble,
    limit_function_check, locate_extrema, nodal_metrics, rescale,
    scale_from_value, scale_of)
from laneemden.geometry import build_planar_grid, rectangle
from laneemden.profiles import regular_bubble, singular_bubble, singular_params
from laneemden.radial import SolverError

POSITIVE_PS = (50.0, 100.0, 200.0, 400.0, 800.0)
NODAL_PS = (100.0, 200.0, 400.0, 800.0)

# measured on converged solutions (shooting + collocation, boundary
# residual ~1e-19); regressions, not external truths
SUP_TO_BUBBLE = {50.0: 1.667906e-02, 100.0: 8.312674e-03, 200.0: 4.149653e-03,
                 400.0: 2.073159e-03, 800.0: 1.036163e-03}
TROUGH_ELL = {100.0: 7.100941, 200.0: 7.148844, 400.0: 7.173223, 800.0: 7.185523}
TROUGH_RESID = {100.0: 1.549686e-02, 200.0: 7.741911e-03, 400.0: 3.869314e-03,
                800.0: 1.934257e-03}
SQRT_P_SUP = [0.807329, 0.583281, 0.418355, 0.298449, 0.212154]
CAUCHY_GAPS = [0.124131, 0.083623, 0.052556, 0.031624]
P_DIRICHLET = {50.0: 62.190562, 800.0: 67.450767}


@pytest.fixture(scope="module")
def positive_family(solutions):
    return [solutions.get(p) for p in POSITIVE_PS]


@pytest.fixture(scope="module")
def nodal_family(solutions):
    return [solutions.get(p, k=1) for p in NODAL_PS]


class _Field:
    """Minimal planar field stand-in: grid + nodal values + exponent."""

    def __init__(self, grid, values, p):
        self.grid, self.values, self.p = grid, values, p


def _two_bubble_field():
    grid = build_planar_grid(rectangle(2.0, 1.0), 65)
    xy = grid.xy()
    p = 16.0
    centers = np.array([[0.5, 0.5], [1.5, 0.5]])
    widths = (0.015, 0.02)
    u = np.zeros(len(xy))
    for c, mu in zip(centers, widths):
        u += 1.0 + regular_bubble(np.hypot(xy[:, 0] - c[0], xy[:, 1] - c[1]) / mu) / p
    return _Field(grid, u, p), centers


def test_scale_formula():
    for p in (2.0, 10.0, 500.0):
        assert scale_from_value(p, 1.0) == pytest.approx(p ** -0.5, rel=1e-14)
    expect = math.exp(-0.5 * (math.log(100.0) + 99.0 * math.log(1.6)))
    assert scale_from_value(100.0, 1.6) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        scale_from_value(100.0, 0.0)


def test_scale_smallest_at_peak(solutions):
    sol = solutions.get(100.0)
    at_peak = scale_of(sol, 0.0)
    assert at_peak == pytest.approx(2.446702e-12, rel=1e-5)
    for r in (0.1, 0.3, 0.7):
        assert at_peak <= scale_of(sol, r)


def test_rescale_invariants(solutions):
    sol = solutions.get(100.0)
    prof = rescale(sol, center=0.0, window=5.0, samples=401)
    assert prof.sign == 1
    assert prof.scale == pytest.approx(scale_of(sol, 0.0), rel=1e-14)
    assert prof.values[200] == 0.0                  # v(0) = 0 exactly
    assert prof.values.max() <= 1e-10               # peak center => v <= 0
    assert np.allclose(prof.values, prof.values[::-1], rtol=0.0, atol=1e-10)
    assert not prof.truncated


def test_rescale_truncation(solutions):
    sol = solutions.get(100.0)
    # at r = 0.9 the solution is far below 1, so the width blows up and
    # the sampling window cannot fit inside the disk
    with pytest.raises(ValueError):
        rescale(sol, center=0.9, window=5.0)
    prof = rescale(sol, center=0.9, window=5.0, truncate=True)
    assert prof.truncated
    assert prof.offsets.size < 401
    with pytest.raises(ValueError):
        fit_bubble(prof)        # too few samples survive
    with pytest.raises(ValueError):
        rescale(sol, center=0.0, window=-1.0)


def test_peak_converges_to_bubble(positive_family):
    resid = []
    for sol in positive_family:
        prof = rescale(sol, center=0.0, window=5.0, samples=1001)
        fit = fit_bubble(prof, "regular")
        assert fit.family == "regular" and fit.ell is None
        assert fit.residual == pytest.approx(SUP_TO_BUBBLE[sol.p], rel=1e-3)
        resid.append(fit.residual)
    assert np.all(np.diff(resid) < 0)
    ratios = np.array(resid[:-1]) / np.array(resid[1:])
    assert np.all(np.abs(ratios - 2.0) < 0.1)       # clean 1/p rate


def test_regular_fit_identity():
    s = np.linspace(-5.0, 5.0, 501)
    prof = RescaledProfile(50.0, np.zeros(2), 1e-6, 1, s, regular_bubble(np.abs(s)))
    assert fit_bubble(prof, "regular").residual < 1e-14


def test_singular_fit_identity():
    s = np.linspace(-5.0, 5.0, 1001)
    rho = np.abs(1.0 + s)
    vals = np.full_like(s, np.nan)
    good = rho > 0.05
    vals[good] = singular_bubble(rho[good], singular_params(1.0))
    prof = RescaledProfile(50.0, np.array([0.015, 0.0]), 0.015, -1, s, vals)
    fit = fit_bubble(prof, "singular")
    assert abs(fit.ell - 1.0) < 1e-6
    assert fit.residual < 1e-8


def test_trough_converges_to_singular_bubble(nodal_family):
    fits = []
    for sol in nodal_family:
        ext = locate_extrema(sol)
        r_min = float(ext["x_min"][0])
        prof = rescale(sol, center=r_min, window=5.0, samples=1001)
        assert prof.sign == -1
        fit = fit_bubble(prof, "singular")
        assert fit.ell == pytest.approx(TROUGH_ELL[sol.p], abs=1e-3)
        assert fit.residual == pytest.approx(TROUGH_RESID[sol.p], rel=1e-2)
        # trough sits where the fitted bubble vanishes
        base = r_min / prof.scale
        assert abs(fit.ell - base) < 0.01
        fits.append(fit)
    resid = [f.residual for f in fits]
    assert np.all(np.diff(resid) < 0)
    ells = [f.ell for f in fits]
    assert np.all(np.abs(np.diff(ells)) < 0.06)     # parameter stabilizes


def test_fit_validation():
    s = np.linspace(-5.0, 5.0, 101)
    prof = RescaledProfile(10.0, np.zeros(2), 1.0, 1, s, regular_bubble(np.abs(s)))
    with pytest.raises(ValueError):
        fit_bubble(prof, "spherical")
    patch = RescaledProfile(10.0, np.zeros(2), 1.0, 1, s,
                            np.zeros((s.size, s.size)))
    with pytest.raises(ValueError):
        fit_bubble(patch, "singular")
    short = RescaledProfile(10.0, np.zeros(2), 1.0, 1, s[:50],
                            regular_bubble(np.abs(s[:50])))
    with pytest.raises(ValueError):
        fit_bubble(short)


def test_extraction_positive(solutions):
    rep = extract_concentration_points(solutions.get(100.0))
    assert rep.converged and rep.count == 1
    assert np.array_equal(rep.points[0], [0.0, 0.0])
    assert rep.p3_constant == pytest.approx(2.010677, rel=1e-5)
    assert rep.p4_constant == pytest.approx(6.365675, rel=1e-5)
    assert rep.count_at(640.0) == 1
    assert rep.peaks[0] == pytest.approx(solutions.get(100.0).center_value, rel=1e-12)


def test_extraction_nodal_keeps_one_point(solutions):
    # both extrema concentrate at the origin; the trough must not be
    # promoted to a second concentration point
    rep = extract_concentration_points(solutions.get(100.0, k=1))
    assert rep.converged and rep.count == 1
    assert np.array_equal(rep.points[0], [0.0, 0.0])
    assert rep.p3_constant == pytest.approx(51.340414, rel=1e-5)
    assert rep.p4_constant == pytest.approx(14.293396, rel=1e-5)
    assert rep.peaks[0] > 0


def test_extraction_deterministic(solutions):
    a = extract_concentration_points(solutions.get(100.0, k=1))
    b = extract_concentration_points(solutions.get(100.0, k=1))
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.scales, b.scales)
    assert a.trail == b.trail and a.count == b.count


def test_extraction_two_bubbles():
    field, centers = _two_bubble_field()
    rep = extract_concentration_points(field)
    assert rep.converged and rep.count == 2
    found = rep.points[np.argsort(rep.points[:, 0])]
    assert np.all(np.hypot(*(found - centers).T) <= field.grid.h)
    assert np.all(rep.separations[~np.eye(2, dtype=bool)] > 10.0)

    # the certified sup must match a brute-force scan over all nodes
    xy, vals = field.grid.xy(), field.values
    d = np.minimum(np.hypot(*(xy - rep.points[0]).T),
                   np.hypot(*(xy - rep.points[1]).T))
    brute = float(np.max(field.p * d ** 2 * np.abs(vals) ** (field.p - 1.0)))
    assert rep.p3_constant == pytest.approx(brute, rel=1e-12)
    assert rep.p4_constant is not None and rep.p4_constant > 0


def test_no_further_point_extractable(solutions):
    # every unextracted node either satisfies the density bound or sits
    # within a few widths of an extracted point
    sol = solutions.get(100.0, k=1)
    rep = extract_concentration_points(sol)
    r = sol.mesh.nodes
    with np.errstate(divide="ignore"):
        logu = np.log(np.abs(sol.values))
        logm = math.log(sol.p) + 2.0 * np.log(r) + (sol.p - 1.0) * logu
        logsep = np.log(r) + 0.5 * (math.log(sol.p) + (sol.p - 1.0) * logu)
    ok = (logm <= math.log(rep.cstar)) | (logsep < math.log(10.0))
    assert np.all(ok | ~np.isfinite(logm))


def test_extraction_validation(solutions):
    with pytest.raises(ValueError):
        extract_concentration_points(solutions.get(50.0), cstar=0.0)
    grid = build_planar_grid(rectangle(1.0, 1.0), 33)
    with pytest.raises(ValueError):
        extract_concentration_points(_Field(grid, np.zeros(grid.interior_count), 8.0))


def test_energy_report_positive(positive_family):
    deficits = []
    for sol in positive_family:
        er = energy_report(sol)
        assert er["two_pE"] == pytest.approx(2.0 * er["pE"], rel=1e-14)
        assert "sign_deficit_pos" not in er
        assert er["whole_deficit"] == pytest.approx(
            EIGHT_PI_E - er["p_dirichlet"], rel=1e-12)
        deficits.append(er["whole_deficit"])
    for p, want in P_DIRICHLET.items():
        sol = next(s for s in positive_family if s.p == p)
        assert energy_report(sol)["p_dirichlet"] == pytest.approx(want, rel=1e-6)
    assert np.all(np.array(deficits) > 0)
    assert np.all(np.diff(deficits) < 0)            # climbing toward 8*pi*e


def test_energy_report_nodal_sign_parts(solutions):
    er = energy_report(solutions.get(100.0, k=1))
    # each sign part already carries more than the single-bubble level
    assert er["sign_deficit_pos"] < 0
    assert er["sign_deficit_neg"] < 0
    assert er["dirichlet_pos"] + er["dirichlet_neg"] == pytest.approx(
        er["p_dirichlet"], rel=1e-12)


def test_nodal_metrics_ladder(nodal_family):
    rows = [nodal_metrics(sol) for sol in nodal_family]
    shrink = [m["reach_over_min_scale"] for m in rows]
    ratio = [m["scale_ratio"] for m in rows]
    vis = [m["dist_max_ratio"] for m in rows]
    assert np.all(np.diff(shrink) < 0) and shrink[-1] < 1e-30
    assert np.all(np.diff(ratio) < 0) and ratio[-1] < 1e-100
    assert np.all(np.diff(vis) > 0)                 # peaks leave the zero set behind
    for m, sol in zip(rows, nodal_family):
        assert m["dist_min_ratio"] == pytest.approx(TROUGH_ELL[sol.p], abs=5e-3)


def test_nodal_metrics_requires_sign_change(solutions):
    with pytest.raises(ValueError):
        nodal_metrics(solutions.get(100.0))


def test_nodal_metrics_planar_grid():
    grid = build_planar_grid(rectangle(2.0, 1.0), 65)
    xy = grid.xy()
    field = _Field(grid, np.sin(2.0 * np.pi * xy[:, 0]) * np.sin(np.pi * xy[:, 1]), 8.0)
    m = nodal_metrics(field)
    # interior zero lines sit at x = 0.5, 1.0, 1.5
    far = math.hypot(1.5, 1.0 - grid.h)
    assert m["zero_set_reach"] == pytest.approx(far, abs=2.0 * grid.h)
    assert m["dist_max_to_zero"] == pytest.approx(0.25, abs=2.0 * grid.h)
    assert m["dist_min_to_zero"] == pytest.approx(0.25, abs=2.0 * grid.h)
    assert m["touches_boundary"]

    solid = _Field(grid, np.sin(np.pi * xy[:, 0] / 2.0) * np.sin(np.pi * xy[:, 1]), 8.0)
    with pytest.raises(ValueError):
        nodal_metrics(solid)


def test_limit_away_from_peaks(positive_family, solutions):
    rep = extract_concentration_points(solutions.get(100.0))
    chk = limit_function_check(positive_family, rep)
    assert chk["sqrtp_decreasing"]
    assert chk["cauchy_decreasing"]
    assert chk["sqrtp_sup"] == pytest.approx(SQRT_P_SUP, rel=1e-4)
    assert chk["cauchy_gaps"] == pytest.approx(CAUCHY_GAPS, rel=1e-3)
    # the scaled family itself stays bounded away from zero in sup norm
    assert all(sol.sup_norm > 1.0 for sol in positive_family)


def test_limit_check_validation(positive_family):
    with pytest.raises(ValueError):
        limit_function_check(positive_family[:1])
    with pytest.raises(ValueError):
        limit_function_check(positive_family, inner=0.9, outer=0.4)
    inside = ConcentrationReport(
        p=100.0, points=np.array([[0.5, 0.0]]), scales=np.ones(1),
        peaks=np.ones(1), count=1, p3_constant=1.0, p4_constant=None,
        separations=np.zeros((1, 1)), trail=(1.0,), cstar=64.0, converged=True)
    with pytest.raises(ValueError):
        limit_function_check(positive_family, inside)
