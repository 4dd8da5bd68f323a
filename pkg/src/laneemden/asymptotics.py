"""Concentration analysis: scales, rescaled bubbles, point extraction.

As p grows, solutions organize themselves around a finite set of sharp
peaks of width mu = (p |u|^{p-1})^{-1/2}.  This module measures that
structure: it rescales a solution about a chosen point to unit peak
width, fits the result against the two Liouville limit profiles, greedily
exhausts the set of concentration points, and reports the bounded
quantities (energy densities, separation ratios, weighted gradient sups)
whose uniform control characterizes the concentration regime.

Radial solutions are treated throughout as genuine 2-D fields on the
disk or annulus; distances are planar distances.  All p-dependent powers
are evaluated in log space -- |u|^{p-1} underflows to 0 in double
precision long before the quantities built from it stop being O(1).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import ANNULUS
from .profiles import regular_bubble, singular_bubble, singular_params
from .radial import RadialSolution, SolverError, radial_energy

EIGHT_PI_E = 8.0 * math.pi * math.e

# two candidate centers count as separated once |x_i - x_j| exceeds this
# many widths; the trend across p, not the fixed cutoff, carries meaning
SEPARATION_RATIO = 10.0

__all__ = [
    "RescaledProfile", "BubbleFit", "ConcentrationReport",
    "scale_from_value", "scale_of", "locate_extrema", "rescale",
    "fit_bubble", "extract_concentration_points", "energy_report",
    "nodal_metrics", "limit_function_check", "SEPARATION_RATIO",
    "EIGHT_PI_E",
]


def scale_from_value(p: float, value: float) -> float:
    """Concentration width (p |value|^{p-1})^{-1/2} for a peak height."""
    if value == 0.0:
        raise ValueError("concentration scale undefined where the solution vanishes")
    return math.exp(-0.5 * (math.log(p) + (p - 1.0) * math.log(abs(value))))


def _eval_at(obj, point):
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if isinstance(obj, RadialSolution):
        r = abs(pt[0]) if pt.size == 1 else float(np.hypot(pt[0], pt[1]))
        return float(obj.u(r))
    return float(obj.interpolate(pt[None, :])[0])


def scale_of(obj, point) -> float:
    """Concentration width of `obj` at `point` (radius or xy pair)."""
    return scale_from_value(obj.p, _eval_at(obj, point))


def _polish_radial_extremum(sol, idx, direction):
    """Continuous extremum location near node idx (direction -1 = max)."""
    r = sol.mesh.nodes
    if idx == 0 or idx == r.size - 1:
        return float(r[idx]), float(sol.values[idx])
    lo, hi = float(r[idx - 1]), float(r[idx + 1])
    # optimize in log radius: graded meshes space nodes by multiplicative
    # factors, so the bracket can span a decade of radius
    res = minimize_scalar(lambda t: direction * float(sol.u(math.exp(t))),
                          bounds=(math.log(lo), math.log(hi)),
                          method="bounded", options={"xatol": 1e-13})
    rr = math.exp(float(res.x))
    return rr, float(sol.u(rr))


def locate_extrema(obj) -> dict:
    """Locations and values of the max and the min of a solution.

    Radial extrema between mesh nodes are polished by scalar minimization
    of the dense interpolant: a node argmin alone carries the local node
    spacing as location error, which on graded meshes is a multiplicative
    factor -- far too coarse to anchor a rescaling.  Planar fields report
    node extrema as-is, consistent with their grid accuracy.
    """
    pts, vals, _ = _field_nodes(obj)
    i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))
    if isinstance(obj, RadialSolution):
        r_max, u_max = _polish_radial_extremum(obj, i_max, -1)
        r_min, u_min = _polish_radial_extremum(obj, i_min, +1)
        return {"x_max": np.array([r_max, 0.0]), "u_max": u_max,
                "x_min": np.array([r_min, 0.0]), "u_min": u_min}
    return {"x_max": pts[i_max], "u_max": float(vals[i_max]),
            "x_min": pts[i_min], "u_min": float(vals[i_min])}


# ---------------------------------------------------------------------------
# rescaling about a point

@dataclass(frozen=True)
class RescaledProfile:
    """Solution rescaled about a point to unit width and unit height.

    values[i] = (p/u_c) * (u(center + scale*offset_i) - u_c), so the
    profile vanishes at offset 0 and is <= 0 whenever the center is a
    global extremum of its sign.  Radial inputs are sampled along the ray
    through the center (1-D values over signed offsets); planar fields
    over the tensor patch offsets x offsets (2-D values, NaN where the
    window left the domain).
    """

    p: float
    center: np.ndarray          # (2,)
    scale: float
    sign: int                   # +1 about a peak, -1 about a trough
    offsets: np.ndarray         # (ns,) per-axis sample offsets
    values: np.ndarray          # (ns,) radial section or (ns, ns) patch
    truncated: bool = False


def rescale(obj, center=None, scale=None, window: float = 5.0,
            samples: int = 401, truncate: bool = False) -> RescaledProfile:
    """Sample the rescaled profile on offsets in [-window, window].

    center defaults to the location of max |u| over the nodes; scale to
    the concentration width there.  If the window pokes out of the domain
    the call fails unless truncate=True, which drops (radial) or NaNs
    (planar) the outside samples and flags the profile.
    """
    if window <= 0 or samples < 3:
        raise ValueError("need a positive window and at least 3 samples")
    radial = isinstance(obj, RadialSolution)
    if center is None:
        pts, vals = _field_nodes(obj)[:2]
        center = pts[int(np.argmax(np.abs(vals)))]
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size == 1:
        center = np.array([center[0], 0.0])
    u_c = _eval_at(obj, center)
    if u_c == 0.0:
        raise ValueError("cannot rescale about a zero of the solution")
    mu = float(scale) if scale is not None else scale_from_value(obj.p, u_c)
    if mu <= 0:
        raise ValueError("scale must be positive")
    s = np.linspace(-window, window, samples)

    if radial:
        r_c = float(np.hypot(*center))
        rho = r_c + mu * s
        if obj.domain.kind == ANNULUS:
            inside = (rho > obj.domain.inner) & (rho < 1.0)
        else:
            # the ray may pass through the origin; reflection is exact
            rho = np.abs(rho)
            inside = rho < 1.0
        if not inside.all():
            if not truncate:
                raise ValueError("rescaling window leaves the domain; "
                                 "pass truncate=True to clip it")
            s, rho = s[inside], rho[inside]
        v = (obj.p / u_c) * (obj.u(rho) - u_c)
        return RescaledProfile(obj.p, np.array([r_c, 0.0]), mu,
                               1 if u_c > 0 else -1, s, v,
                               truncated=not inside.all() or s.size < samples)

    X, Y = np.meshgrid(s, s, indexing="ij")
    pts = np.column_stack([center[0] + mu * X.ravel(), center[1] + mu * Y.ravel()])
    inside = obj.grid.domain.contains(pts)
    if not inside.all() and not truncate:
        raise ValueError("rescaling window leaves the domain; "
                         "pass truncate=True to clip it")
    v = np.full(pts.shape[0], np.nan)
    v[inside] = (obj.p / u_c) * (obj.interpolate(pts[inside]) - u_c)
    return RescaledProfile(obj.p, center, mu, 1 if u_c > 0 else -1, s,
                           v.reshape(samples, samples),
                           truncated=not inside.all())


# ---------------------------------------------------------------------------
# bubble fitting

@dataclass(frozen=True)
class BubbleFit:
    family: str                 # "regular" | "singular"
    ell: float | None           # trough radius of the fitted singular bubble
    residual: float             # sup |profile - bubble| over the fit window


def fit_bubble(profile: RescaledProfile, family: str = "regular",
               exclude: float = 0.25, bracket=(0.5, 30.0)) -> BubbleFit:
    """Compare a rescaled profile against a Liouville limit profile.

    "regular" measures the parameter-free sup-distance to the entire
    bounded bubble.  "singular" least-squares fits the trough radius ell
    of the singular bubble family, evaluated at the profile's own
    distances from the origin (|center|/scale + offset); samples within
    `exclude` of the log singularity at 0 are left out of the window.
    """
    if profile.offsets.size < 64:
        raise ValueError("need at least 64 samples to fit a bubble")
    if family == "regular":
        if profile.values.ndim == 1:
            model = regular_bubble(np.abs(profile.offsets))
        else:
            X, Y = np.meshgrid(profile.offsets, profile.offsets, indexing="ij")
            model = regular_bubble(np.hypot(X, Y))
        diff = profile.values - model
        return BubbleFit("regular", None, float(np.nanmax(np.abs(diff))))
    if family != "singular":
        raise ValueError(f"unknown bubble family {family!r}")
    if profile.values.ndim != 1:
        raise ValueError("singular fits expect a radial section")
    base = float(np.hypot(*profile.center)) / profile.scale
    rho = np.abs(base + profile.offsets)
    mask = (rho >= exclude) & np.isfinite(profile.values)
    if np.count_nonzero(mask) < 64:
        raise ValueError("fit window too small after excluding the singularity")
    v, rho = profile.values[mask], rho[mask]

    def objective(ell):
        return float(np.mean((v - singular_bubble(rho, singular_params(ell))) ** 2))

    res = minimize_scalar(objective, bounds=bracket, method="bounded",
                          options={"xatol": 1e-10})
    if not res.success:
        raise SolverError("singular bubble fit did not converge")
    ell = float(res.x)
    span = bracket[1] - bracket[0]
    if min(ell - bracket[0], bracket[1] - ell) < 1e-3 * span:
        raise SolverError(f"singular bubble fit pinned at the bracket edge (ell={ell:.4g})")
    resid = float(np.max(np.abs(v - singular_bubble(rho, singular_params(ell)))))
    return BubbleFit("singular", ell, resid)


# ---------------------------------------------------------------------------
# concentration-point exhaustion

@dataclass(frozen=True)
class ConcentrationReport:
    """Greedy exhaustion of the concentration set of one solution.

    trail[n-1] is the sup of p R_n(x)^2 |u(x)|^{p-1} after n points,
    R_n being the distance to the nearest extracted point; extraction
    stops at the first n with trail[n-1] <= cstar (then count = n), but
    the trail is continued down to cstar/10 so the count's insensitivity
    to the threshold can be read off the report.
    """

    p: float
    points: np.ndarray          # (count, 2)
    scales: np.ndarray          # (count,)
    peaks: np.ndarray           # (count,) signed u at the points
    count: int
    p3_constant: float          # sup p R_count^2 |u|^{p-1}
    p4_constant: float | None   # sup p R_count |grad u|, None if no gradient
    separations: np.ndarray     # (count, count), |x_i-x_j|/mu_i, diag 0
    trail: tuple
    cstar: float
    converged: bool

    def count_at(self, cstar: float) -> int | None:
        """Point count the exhaustion would report for another threshold."""
        for n, m in enumerate(self.trail, start=1):
            if m <= cstar:
                return n
        return None


def _field_nodes(obj):
    """(points (N,2), values (N,), p) for a radial solution or planar field."""
    if isinstance(obj, RadialSolution):
        r = obj.mesh.nodes
        return np.column_stack([r, np.zeros_like(r)]), obj.values, obj.p
    return obj.grid.xy(), np.asarray(obj.values, dtype=float).ravel(), obj.p


def _gradient_magnitude(obj):
    """|grad u| at the field nodes, or None when it cannot be formed."""
    if isinstance(obj, RadialSolution):
        return np.abs(obj.du(obj.mesh.nodes))
    grid = obj.grid
    V = np.asarray(obj.values, dtype=float).reshape(grid.shape)
    if grid.kind == "cartesian":
        P = np.pad(V, 1)        # homogeneous boundary values
        gx = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2.0 * grid.h)
        gy = (P[1:-1, 2:] - P[1:-1, :-2]) / (2.0 * grid.h)
        return np.hypot(gx, gy).ravel()
    rings = grid.rings
    gr = np.gradient(V, rings, axis=0)
    dtheta = 2.0 * math.pi / grid.shape[1]
    gt = (np.roll(V, -1, axis=1) - np.roll(V, 1, axis=1)) / (2.0 * dtheta)
    gt /= rings[:, None]
    return np.hypot(gr, gt).ravel()


def extract_concentration_points(obj, cstar: float = 64.0,
                                 max_points: int = 16) -> ConcentrationReport:
    """Greedy argmax exhaustion of the concentration set.

    The first point is the argmax of |u| over the nodes; each further
    point is the node maximizing p R_n(x)^2 |u(x)|^{p-1}, added only
    while that sup exceeds cstar.  Discrete argmax over grid nodes, no
    sub-cell polishing: deterministic and consistent with grid accuracy.
    """
    if cstar <= 0:
        raise ValueError("the stopping threshold must be positive")
    pts, vals, p = _field_nodes(obj)
    with np.errstate(divide="ignore"):
        logu = np.log(np.abs(vals))
    if not np.any(np.isfinite(logu)):
        raise ValueError("cannot analyze an identically zero field")

    chosen = [int(np.argmax(np.abs(vals)))]
    dist = np.hypot(*(pts - pts[chosen[0]]).T)
    trail = []
    count = None
    while True:
        with np.errstate(divide="ignore"):
            logm = math.log(p) + 2.0 * np.log(dist) + (p - 1.0) * logu
        top = int(np.argmax(logm))
        m = float(np.exp(logm[top]))
        trail.append(m)
        if count is None and m <= cstar:
            count = len(chosen)
        # keep extending the trail past convergence so the count's
        # sensitivity to the threshold can be read off down to cstar/10
        if m <= cstar / 10.0 or len(chosen) >= max_points:
            break
        chosen.append(top)
        dist = np.minimum(dist, np.hypot(*(pts - pts[top]).T))

    converged = count is not None
    if not converged:
        count = max_points
    points = pts[chosen[:count]]
    peaks = vals[chosen[:count]]
    scales = np.array([scale_from_value(p, v) for v in peaks])

    sep = np.zeros((count, count))
    for i in range(count):
        for j in range(count):
            if i != j:
                sep[i, j] = np.hypot(*(points[i] - points[j])) / scales[i]

    # certified constants use the distance to the full extracted set
    dist_k = np.full(pts.shape[0], np.inf)
    for x in points:
        dist_k = np.minimum(dist_k, np.hypot(*(pts - x).T))
    with np.errstate(divide="ignore"):
        log_dk = np.log(dist_k)
        p3 = float(np.exp(np.max(math.log(p) + 2.0 * log_dk + (p - 1.0) * logu)))
    grad = _gradient_magnitude(obj)
    p4 = None
    if grad is not None:
        with np.errstate(divide="ignore"):
            logg = np.where(grad > 0, np.log(np.where(grad > 0, grad, 1.0)), -np.inf)
            p4 = float(np.exp(np.max(math.log(p) + log_dk + logg)))

    return ConcentrationReport(p, points, scales, peaks, count, p3, p4, sep,
                               tuple(trail), cstar, converged)


# ---------------------------------------------------------------------------
# energy and limit diagnostics

def energy_report(obj) -> dict:
    """p-weighted energy quantities of a solution, with limit deficits.

    Reports p * (Dirichlet energy, |u|^{p+1} mass, |u|^p mass), the
    p-weighted energy functional value, per-sign splits, and the gaps to
    the limiting level 8*pi*e of the whole and of each sign part (positive
    deficit = still below the limit at this p).
    """
    terms = radial_energy(obj) if isinstance(obj, RadialSolution) else obj.energy_terms()
    out = dict(terms)
    out["p"] = obj.p
    out["two_pE"] = 2.0 * terms["pE"]
    out["whole_deficit"] = EIGHT_PI_E - terms["p_dirichlet"]
    if terms["dirichlet_neg"] > 0.0:
        out["sign_deficit_pos"] = EIGHT_PI_E - terms["dirichlet_pos"]
        out["sign_deficit_neg"] = EIGHT_PI_E - terms["dirichlet_neg"]
    return out


def _zero_set_radial(sol):
    return np.asarray(sol.zeros, dtype=float)


def _zero_points_planar(obj):
    """Zero-set points located by linear interpolation along grid lines."""
    grid = obj.grid
    V = np.asarray(obj.values, dtype=float).reshape(grid.shape)
    pts = []
    # a symmetry projector can pin the zero line exactly onto grid nodes,
    # where the sign-product test below goes quiet
    exact = list(zip(*np.nonzero(V == 0.0)))
    if grid.kind == "cartesian":
        nx, ny = grid.shape
        xs = grid.h * (1 + np.arange(nx))
        ys = grid.h * (1 + np.arange(ny))
        for i, j in exact:
            pts.append((xs[i], ys[j]))
        a, b = V[:-1, :], V[1:, :]
        for i, j in zip(*np.nonzero(np.sign(a) * np.sign(b) < 0)):
            t = V[i, j] / (V[i, j] - V[i + 1, j])
            pts.append((xs[i] + t * grid.h, ys[j]))
        a, b = V[:, :-1], V[:, 1:]
        for i, j in zip(*np.nonzero(np.sign(a) * np.sign(b) < 0)):
            t = V[i, j] / (V[i, j] - V[i, j + 1])
            pts.append((xs[i], ys[j] + t * grid.h))
    else:
        rings, thetas = grid.rings, grid.thetas
        for i, j in exact:
            pts.append((rings[i] * math.cos(thetas[j]),
                        rings[i] * math.sin(thetas[j])))
        a, b = V[:-1, :], V[1:, :]
        for i, j in zip(*np.nonzero(np.sign(a) * np.sign(b) < 0)):
            t = V[i, j] / (V[i, j] - V[i + 1, j])
            r = rings[i] + t * (rings[i + 1] - rings[i])
            pts.append((r * math.cos(thetas[j]), r * math.sin(thetas[j])))
        W = np.roll(V, -1, axis=1)
        dtheta = 2.0 * math.pi / grid.shape[1]
        for i, j in zip(*np.nonzero(np.sign(V) * np.sign(W) < 0)):
            t = V[i, j] / (V[i, j] - W[i, j])
            th = thetas[j] + t * dtheta
            pts.append((rings[i] * math.cos(th), rings[i] * math.sin(th)))
    return np.asarray(pts, dtype=float)


def nodal_metrics(obj) -> dict:
    """Geometry of the interior zero set relative to the two extrema.

    Records where the zero set reaches farthest from the origin, how far
    the max and min points sit from it, and the width ratio of the two
    peaks -- each both raw and normalized by the relevant width, since
    the statements worth checking are about those ratios.
    """
    pts, vals, p = _field_nodes(obj)
    if vals.min() >= 0.0 or vals.max() <= 0.0:
        raise ValueError("nodal metrics need a sign-changing solution")
    ext = locate_extrema(obj)
    x_max, x_min = ext["x_max"], ext["x_min"]
    mu_max = scale_from_value(p, ext["u_max"])
    mu_min = scale_from_value(p, ext["u_min"])

    if isinstance(obj, RadialSolution):
        zr = _zero_set_radial(obj)
        if zr.size == 0:
            raise ValueError("nodal metrics need a sign-changing solution")
        reach = float(zr.max())
        d_max = float(np.min(np.abs(np.hypot(*x_max) - zr)))
        d_min = float(np.min(np.abs(np.hypot(*x_min) - zr)))
        touches = False
    else:
        zp = _zero_points_planar(obj)
        if zp.size == 0:
            raise ValueError("nodal metrics need a sign-changing solution")
        reach = float(np.max(np.hypot(*zp.T)))
        d_max = float(np.min(np.hypot(*(zp - x_max).T)))
        d_min = float(np.min(np.hypot(*(zp - x_min).T)))
        gap = _boundary_gap(obj.grid, zp)
        touches = bool(gap < 2.0 * obj.grid.h)

    return {
        "p": p,
        "zero_set_reach": reach,
        "dist_max_to_zero": d_max,
        "dist_min_to_zero": d_min,
        "scale_max": mu_max,
        "scale_min": mu_min,
        "scale_ratio": mu_max / mu_min,
        "reach_over_min_scale": reach / mu_min,
        "reach_over_min_radius": reach / float(np.hypot(*x_min)),
        "dist_max_ratio": d_max / mu_max,
        "dist_min_ratio": d_min / mu_min,
        "touches_boundary": touches,
    }


def _boundary_gap(grid, pts):
    if grid.kind == "cartesian":
        w = grid.h * (grid.shape[0] + 1)
        h = grid.h * (grid.shape[1] + 1)
        return float(np.min(np.minimum.reduce(
            [pts[:, 0], w - pts[:, 0], pts[:, 1], h - pts[:, 1]])))
    return float(np.min(1.0 - np.hypot(*pts.T)))


def limit_function_check(family, report: ConcentrationReport | None = None,
                         inner: float = 0.4, outer: float = 0.9,
                         samples: int = 512) -> dict:
    """Convergence diagnostics on a compact annulus away from the peaks.

    Checks that sup |sqrt(p) u_p| over inner <= |x| <= outer decreases
    along the family and that p u_p is Cauchy in the sup norm there.  The
    annulus must avoid every extracted concentration point.
    """
    family = sorted(family, key=lambda s: s.p)
    if len(family) < 2:
        raise ValueError("need at least two solutions to compare")
    if not 0.0 < inner < outer < 1.0:
        raise ValueError("need 0 < inner < outer < 1")
    if report is not None:
        radii = np.hypot(*report.points.T)
        if np.any((radii >= inner) & (radii <= outer)):
            raise ValueError("the comparison annulus contains a concentration point")

    ps, sup_sqrt, pu = [], [], []
    rr = np.linspace(inner, outer, samples)
    for sol in family:
        if not isinstance(sol, RadialSolution):
            raise ValueError("the annulus comparison needs radial solutions")
        if sol.domain.kind == ANNULUS and sol.domain.inner >= inner:
            raise ValueError("comparison annulus pokes inside the domain hole")
        u = sol.u(rr)
        ps.append(sol.p)
        sup_sqrt.append(float(math.sqrt(sol.p) * np.max(np.abs(u))))
        pu.append(sol.p * u)
    gaps = [float(np.max(np.abs(pu[i + 1] - pu[i]))) for i in range(len(pu) - 1)]
    return {
        "p": ps,
        "sqrtp_sup": sup_sqrt,
        "sqrtp_decreasing": bool(np.all(np.diff(sup_sqrt) < 0.0)),
        "cauchy_gaps": gaps,
        "cauchy_decreasing": bool(np.all(np.diff(gaps) < 0.0)) if len(gaps) > 1 else True,
        "radii": rr,
        "limit": pu[-1],
        "residual": gaps[-1],
    }
