"""Unit-disk Green function, its regular part, and the limit diagnostics.

The Dirichlet Green function of the unit disk has the classical image
form G(x,y) = log(|x-y*| |y| / |x-y|) / 2pi with y* = y/|y|^2, and its
regular part H(x,y) = G(x,y) + log|x-y| / 2pi restricts on the diagonal
to H(x,x) = log(1-|x|^2) / 2pi.  Positive solution families converge,
after multiplication by p, to 8 pi times a mass-weighted sum of Green
functions poled at the concentration points; the checks here measure the
distance to that limit and the force balance the limit points satisfy.

Only the disk is covered: every quantitative Green-limit check in the
suite runs there, and other domains would need numerical Green solves.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .asymptotics import ConcentrationReport, scale_of
from .geometry import DISK
from .radial import RadialSolution, radial_energy

EIGHT_PI = 8.0 * math.pi
SQRT_E = math.sqrt(math.e)

__all__ = [
    "GreenEval", "green_disk", "green_gradient", "green_eval",
    "robin_disk", "robin_gradient", "check_balance", "check_green_limit",
]


def _points(x, closed=False):
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[-1] != 2:
        raise ValueError("points must be xy pairs")
    r2 = np.einsum("ij,ij->i", pts, pts)
    lim = 1.0 + 1e-12 if closed else 1.0
    if np.any(r2 >= lim):
        where = "the closed disk" if closed else "the open disk"
        raise ValueError(f"point outside {where}")
    return pts, r2


def green_disk(x, y):
    """G(x,y) on the unit disk; x may be a batch, y is the pole."""
    xs, _ = _points(x, closed=True)
    (y,), (ry2,) = _points(y)
    d = np.hypot(xs[:, 0] - y[0], xs[:, 1] - y[1])
    if np.any(d == 0.0):
        raise ValueError("Green function evaluated at its pole")
    if ry2 == 0.0:
        g = -np.log(np.hypot(xs[:, 0], xs[:, 1])) / (2.0 * math.pi)
    else:
        ystar = y / ry2
        dstar = np.hypot(xs[:, 0] - ystar[0], xs[:, 1] - ystar[1])
        g = (np.log(dstar) + 0.5 * math.log(ry2) - np.log(d)) / (2.0 * math.pi)
    return g if np.ndim(x) == 2 else float(g[0])


def green_gradient(x, y):
    """grad_x G(x,y); same batching as green_disk."""
    xs, _ = _points(x, closed=True)
    (y,), (ry2,) = _points(y)
    dx = xs - y
    d2 = np.einsum("ij,ij->i", dx, dx)
    if np.any(d2 == 0.0):
        raise ValueError("Green function evaluated at its pole")
    if ry2 == 0.0:
        r2 = np.einsum("ij,ij->i", xs, xs)
        grad = -xs / (2.0 * math.pi * r2[:, None])
    else:
        ystar = y / ry2
        dxs = xs - ystar
        ds2 = np.einsum("ij,ij->i", dxs, dxs)
        grad = (dxs / ds2[:, None] - dx / d2[:, None]) / (2.0 * math.pi)
    return grad if np.ndim(x) == 2 else grad[0]


@dataclass(frozen=True)
class GreenEval:
    pole: np.ndarray
    point: np.ndarray
    green: float
    regular: float      # H(x,y) = G(x,y) + log|x-y| / 2pi


def green_eval(x, y) -> GreenEval:
    """Green function and regular part for a single point/pole pair."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = green_disk(x, y)
    h = g + math.log(np.hypot(*(x - y))) / (2.0 * math.pi)
    return GreenEval(y, x, g, h)


def robin_disk(x) -> float:
    """Diagonal regular part H(x,x) = log(1 - |x|^2) / 2pi."""
    (_,), (r2,) = _points(x)
    return math.log1p(-r2) / (2.0 * math.pi)


def robin_gradient(x):
    """Gradient of the map x -> H(x,x): -x / (pi (1 - |x|^2))."""
    (pt,), (r2,) = _points(x)
    return -pt / (math.pi * (1.0 - r2))


def check_balance(points, masses) -> np.ndarray:
    """Force residual of the limiting point configuration, per point.

    Evaluates m_i grad_x H(x_i, x_i) + sum_{l != i} m_l grad_x G(x_i, x_l)
    and returns the Euclidean norms.  The slot gradient of H on the
    diagonal is half the gradient of x -> H(x,x), H being symmetric.
    """
    pts, _ = _points(points)
    m = np.asarray(masses, dtype=float)
    if m.shape != (pts.shape[0],):
        raise ValueError("need one mass per point")
    if np.any(m <= 0):
        raise ValueError("masses must be positive")
    for i in range(pts.shape[0]):
        for j in range(i):
            if np.all(pts[i] == pts[j]):
                raise ValueError("balance residual needs distinct points")
    res = np.zeros(pts.shape[0])
    for i, x in enumerate(pts):
        force = m[i] * 0.5 * robin_gradient(x)
        for l, xl in enumerate(pts):
            if l != i:
                force = force + m[l] * green_gradient(x, xl)
        res[i] = float(np.hypot(*force))
    return res


def _estimate_mass(sol, point) -> float:
    """sup |u| on the ball of radius 10x the local width around a point."""
    c = float(np.hypot(*point))
    mu = scale_of(sol, point)
    lo = max(0.0, c - 10.0 * mu)
    hi = min(1.0, c + 10.0 * mu)
    rr = np.linspace(lo, hi, 801)
    return float(np.max(np.abs(sol.u(rr))))


def check_green_limit(family, report: ConcentrationReport,
                      inner: float = 0.4, outer: float = 0.9,
                      samples: int = 512, masses=None) -> dict:
    """Distance of p u_p to the mass-weighted Green superposition.

    For each family member, the residual is the sup over the test annulus
    of |p u_p(x) - 8 pi sum_i m_i G(x, x_i)| relative to the sup of the
    model there.  Masses default to the per-solution estimate; pass
    `masses` to pin them (e.g. to check against an exact limit).  Also
    tabulates the energy identity p int |grad u|^2 vs 8 pi sum m_i^2.
    """
    family = sorted(family, key=lambda s: s.p)
    if not family:
        raise ValueError("need at least one solution")
    if not 0.0 < inner < outer < 1.0:
        raise ValueError("need 0 < inner < outer < 1")
    pts = report.points[:report.count]
    for sol in family:
        if sol.domain.kind != DISK:
            raise ValueError("the Green-limit check runs on the unit disk only")

    rr = np.linspace(inner, outer, samples)
    xt = np.column_stack([rr, np.zeros_like(rr)])
    ps, resid, mass_rows, e_lhs, e_rhs = [], [], [], [], []
    for sol in family:
        if masses is None:
            row = []
            for x in pts:
                c = float(np.hypot(*x))
                mu = scale_of(sol, x)
                if c + 10.0 * mu >= inner and c - 10.0 * mu <= outer:
                    raise ValueError("test annulus touches a concentration "
                                     "neighborhood; shrink it or drop the point")
                row.append(_estimate_mass(sol, x))
        else:
            row = [float(m) for m in np.atleast_1d(masses)]
            if len(row) != len(pts):
                raise ValueError("need one mass per concentration point")
        model = np.zeros_like(rr)
        for m, x in zip(row, pts):
            model += EIGHT_PI * m * green_disk(xt, x)
        gap = np.max(np.abs(sol.p * sol.u(rr) - model))
        ps.append(sol.p)
        resid.append(float(gap / np.max(np.abs(model))))
        mass_rows.append(row)
        if isinstance(sol, RadialSolution):
            e_lhs.append(radial_energy(sol)["p_dirichlet"])
            e_rhs.append(EIGHT_PI * float(np.sum(np.square(row))))
        else:
            e_lhs.append(None)
            e_rhs.append(None)
    return {
        "p": ps,
        "residual": resid,
        "residual_decreasing": bool(np.all(np.diff(resid) < 0.0)),
        "masses": mass_rows,
        "energy_lhs": e_lhs,
        "energy_rhs": e_rhs,
    }
