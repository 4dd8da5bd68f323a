"""Planar solver: positive and sign-changing states on 2-D grids.

The discretization is a finite-volume flux form.  Each interior cell
balances the fluxes through its faces against the cell-integrated
nonlinearity, so the stiffness matrix K is symmetric with positive edge
conductances and the discrete problem reads

    K u = A |u|^{p-1} u,        A = diag(cell areas),

whose left side supplies the discrete Dirichlet energy uᵀKu exactly.  On
polar grids the innermost face sits at r = 0 with zero length, so the
coordinate singularity never enters a stencil; the outer boundary is a
half-spaced Dirichlet face.

Solutions are found by damping a Newton iteration started from an
energy-aware guess: the ground eigenfunction projected onto the Nehari
manifold for positive states, a concentric two-bubble profile or an
antisymmetric eigenfunction combination for sign-changing ones.  Plain
Newton diverges from the bubble-tower inits, so steps backtrack on the
residual norm.  Discrete rotation symmetry is enforced exactly by
averaging over the group orbit (an index shift when the angular count is
a multiple of the order).

Exponents are capped at 50: the concentration width shrinks like
e^{-p/4} and beyond that no affordable 2-D grid resolves it.  The radial
module owns the large-p regime.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import coo_matrix, diags
from scipy.sparse.linalg import splu

from .geometry import (DISK, DISK_SECTOR, RECTANGLE, DomainSpec, PlanarGrid,
                       build_planar_grid, unit_disk)
from .profiles import bubble_tower, singular_params
from .radial import SolverError, _powsgn, predicted_scale, solve_radial
from .spectrum import planar_hessian

P_CAP = 50.0          # largest exponent a 2-D grid can resolve
_DEFAULT_RESOLUTION = 96
_EIGEN_DIRECT = 3.0   # largest p the low-mode seed is solved at directly

__all__ = [
    "PlanarField", "P_CAP", "operators", "nehari_project",
    "nodal_nehari_project", "solve_positive", "solve_nodal", "continue_in_p",
]


# ---------------------------------------------------------------------------
# discrete operators

def _grid_key(grid: PlanarGrid):
    faces = grid.rfaces.tobytes() if grid.rfaces is not None else None
    return (grid.domain, grid.kind, grid.shape, grid.h, faces)


_EDGE_CACHE: dict = {}


def _edges(grid: PlanarGrid):
    """Flux graph of the grid: interior edges (ia, ib, conductance) plus
    boundary attachments (node, conductance) for the Dirichlet faces."""
    key = _grid_key(grid)
    if key in _EDGE_CACHE:
        return _EDGE_CACHE[key]
    if grid.kind == "cartesian":
        nx, ny = grid.shape
        idx = np.arange(nx * ny).reshape(nx, ny)
        # unit conductance: face length h over center distance h
        ia = np.concatenate([idx[:-1].ravel(), idx[:, :-1].ravel()])
        ib = np.concatenate([idx[1:].ravel(), idx[:, 1:].ravel()])
        g = np.ones(ia.size)
        bn = np.concatenate([idx[0], idx[-1], idx[:, 0], idx[:, -1]])
        gb = np.ones(bn.size)
        area = np.full(nx * ny, grid.h * grid.h)
    else:
        nr, nt = grid.shape
        f, rc = grid.rfaces, grid.rings
        dth = 2.0 * math.pi / nt
        idx = np.arange(nr * nt).reshape(nr, nt)
        # ring-to-ring faces (the r=0 face has zero length: no flux there)
        grad = f[1:-1] * dth / np.diff(rc)
        ia = idx[:-1].ravel()
        ib = idx[1:].ravel()
        g = np.repeat(grad, nt)
        # angular faces, periodic wrap
        gth = (f[1:] - f[:-1]) / (rc * dth)
        ia = np.concatenate([ia, idx.ravel()])
        ib = np.concatenate([ib, np.roll(idx, -1, axis=1).ravel()])
        g = np.concatenate([g, np.repeat(gth, nt)])
        # outer Dirichlet face, half spacing from the last ring center
        bn = idx[-1]
        gb = np.full(nt, f[-1] * dth / (f[-1] - rc[-1]))
        area = np.repeat(0.5 * (f[1:] ** 2 - f[:-1] ** 2) * dth, nt)
    out = (ia, ib, g, bn, gb, area)
    _EDGE_CACHE[key] = out
    return out


def operators(grid: PlanarGrid):
    """Stiffness matrix K (flux form) and cell-area vector of the grid.

    K is symmetric positive definite; uᵀKu is the discrete Dirichlet
    energy and the discrete problem reads K u = area * |u|^{p-1} u.
    """
    ia, ib, g, bn, gb, area = _edges(grid)
    n = area.size
    rows = np.concatenate([ia, ib, ia, ib, bn])
    cols = np.concatenate([ia, ib, ib, ia, bn])
    vals = np.concatenate([g, g, -g, -g, gb])
    K = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    return K, area


def _flux_residual(ed, p, u, with_scale: bool = False):
    """F(u) = K u - area |u|^{p-1} u, accumulated edge by edge.

    Taking the value differences before multiplying by the conductances
    avoids the cancellation K@u suffers on the tiny near-center cells of
    polar grids.  With with_scale=True also returns the per-cell defect
    scale D_i = sum of |flux| + boundary flux + area (1 + |u|^p): the
    magnitudes whose near-cancellation produces F_i, so |F_i| / D_i is
    the componentwise relative backward error of cell i's balance.
    """
    ia, ib, g, bn, gb, area = ed
    n = area.size
    du = g * (u[ia] - u[ib])
    F = np.bincount(ia, weights=du, minlength=n)
    F -= np.bincount(ib, weights=du, minlength=n)
    F += np.bincount(bn, weights=gb * u[bn], minlength=n)
    src = area * _powsgn(u, p)
    F -= src
    if not with_scale:
        return F
    adu = np.abs(du)
    D = np.bincount(ia, weights=adu, minlength=n)
    D += np.bincount(ib, weights=adu, minlength=n)
    D += np.bincount(bn, weights=gb * np.abs(u[bn]), minlength=n)
    D += np.abs(src) + area
    return F, D


# ---------------------------------------------------------------------------
# the field

@dataclass
class PlanarField:
    """A converged 2-D state sampled on its grid.

    `values` has the grid shape (x-major on rectangles, ring-major on
    disks); boundary values are identically zero and not stored.
    """

    grid: PlanarGrid
    p: float
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    _interp: object = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != tuple(self.grid.shape):
            raise ValueError(f"values shape {v.shape} does not match the "
                             f"grid shape {tuple(self.grid.shape)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    @property
    def sign_changing(self) -> bool:
        return bool(self.values.min() < 0.0 < self.values.max())

    def interpolate(self, pts) -> np.ndarray:
        """Bilinear interpolation at points (N, 2), zero on the boundary."""
        pts = np.asarray(pts, dtype=float)
        if self._interp is None:
            self._interp = self._build_interp()
        if self.grid.kind == "cartesian":
            return self._interp(pts)
        r = np.minimum(np.hypot(pts[:, 0], pts[:, 1]), 1.0)
        th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
        return self._interp(np.column_stack([r, th]))

    def _build_interp(self):
        V = self.values
        if self.grid.kind == "cartesian":
            nx, ny = self.grid.shape
            h = self.grid.h
            xs = np.concatenate([[0.0], h * (1 + np.arange(nx)), [h * (nx + 1)]])
            ys = np.concatenate([[0.0], h * (1 + np.arange(ny)), [h * (ny + 1)]])
            return RegularGridInterpolator((xs, ys), np.pad(V, 1),
                                           bounds_error=False, fill_value=0.0)
        # polar: pad a single-valued center row, a zero Dirichlet row at
        # r=1, and a wrapped angle column
        rs = np.concatenate([[0.0], self.grid.rings, [1.0]])
        th = np.concatenate([self.grid.thetas, [2.0 * math.pi]])
        Z = np.vstack([np.full(V.shape[1], V[0].mean()), V,
                       np.zeros(V.shape[1])])
        Z = np.hstack([Z, Z[:, :1]])
        return RegularGridInterpolator((rs, th), Z, bounds_error=False,
                                       fill_value=0.0)

    def energy_terms(self) -> dict:
        """p-weighted energy integrals, split by sign.

        Sign-change edges split their energy at the zero of the linear
        interpolant, so the positive and negative Dirichlet parts add up
        to the total exactly.
        """
        p = self.p
        ia, ib, g, bn, gb, _ = _edges(self.grid)
        _, area = operators(self.grid)
        u = self.values.ravel()
        ua, ub = u[ia], u[ib]
        e_edge = g * (ua - ub) ** 2
        e_bnd = gb * u[bn] ** 2
        dirichlet = float(e_edge.sum() + e_bnd.sum())
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where((ua >= 0) & (ub >= 0), 1.0,
                            np.where((ua <= 0) & (ub <= 0), 0.0,
                                     np.maximum(ua, ub) / np.abs(ua - ub)))
        d_pos = float((frac * e_edge).sum() + e_bnd[u[bn] > 0].sum())
        up = np.maximum(u, 0.0)
        un = np.minimum(u, 0.0)
        m_pos = float(area @ up ** (p + 1.0))
        m_neg = float(area @ np.abs(un) ** (p + 1.0))
        mass_p = float(area @ np.abs(u) ** p)
        return {
            "p_dirichlet": p * dirichlet,
            "p_mass_p1": p * (m_pos + m_neg),
            "p_mass_p": p * mass_p,
            "pE": (0.5 - 1.0 / (p + 1.0)) * p * dirichlet,
            "dirichlet_pos": p * d_pos,
            "dirichlet_neg": p * (dirichlet - d_pos),
            "mass_p1_pos": p * m_pos,
            "mass_p1_neg": p * m_neg,
        }

    def residual(self) -> float:
        """Componentwise backward error of the discrete flux balance.

        Each cell's defect F_i (net flux minus area-weighted source) is
        divided by D_i, the sum of the magnitudes of the terms that
        cancel to produce it: the absolute edge and boundary fluxes plus
        area * (1 + |u_i|^p).  On cells where fluxes and source are
        O(area) this is the plain sup norm of Δ_h u + |u|^{p-1}u; on
        concentrated states it is the only measure double precision can
        drive to 1e-9 — at a peak the source reaches |u|^p ~ 1e16, and
        in the near-harmonic region between bubbles two equal fluxes
        cancel to a divergence thousands of times smaller, so an
        absolute pointwise defect floors at roundoff in both spots.
        """
        ed = _edges(self.grid)
        return _scaled_sup(ed, self.p, self.values.ravel())

    def to_dict(self) -> dict:
        return {
            "kind": "planar-field",
            "p": self.p,
            "grid": self.grid.to_dict(),
            "values": [[float(v) for v in row] for row in self.values],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlanarField":
        if d.get("kind") != "planar-field":
            raise ValueError("not a serialized planar field")
        return cls(PlanarGrid.from_dict(d["grid"]), d["p"],
                   np.asarray(d["values"], dtype=float), d.get("metadata", {}))


# ---------------------------------------------------------------------------
# Nehari projections

def nehari_project(grid: PlanarGrid, values, p: float):
    """Scale a nonzero function onto the discrete Nehari manifold.

    Returns t*u with t = (uᵀKu / Σ area |u|^{p+1})^{1/(p-1)}, the unique
    positive multiple at which the energy derivative along u vanishes.
    """
    v = np.asarray(values, dtype=float)
    u = v.ravel()
    if not np.any(u):
        raise ValueError("cannot project the zero function")
    K, area = operators(grid)
    t = (float(u @ (K @ u)) / float(area @ np.abs(u) ** (p + 1.0))) \
        ** (1.0 / (p - 1.0))
    return t * v


def nodal_nehari_project(grid: PlanarGrid, values, p: float):
    """Scale the two sign parts independently onto the nodal Nehari set.

    Solves the 2x2 system <E'(a u+ + b u-), u+-> = 0 by Newton; the
    discrete parts couple through the sign-change edges, so the factors
    are not quite the two single-part projections.
    """
    v = np.asarray(values, dtype=float)
    u = v.ravel()
    if not (np.any(u > 0) and np.any(u < 0)):
        raise ValueError("projection needs a sign-changing function; "
                         "use nehari_project for one-signed input")
    K, area = operators(grid)
    up = np.maximum(u, 0.0)
    un = np.minimum(u, 0.0)
    dp = float(up @ (K @ up))
    dn = float(un @ (K @ un))
    c = float(up @ (K @ un))
    mp = float(area @ up ** (p + 1.0))
    mn = float(area @ np.abs(un) ** (p + 1.0))
    a = (dp / mp) ** (1.0 / (p - 1.0))
    b = (dn / mn) ** (1.0 / (p - 1.0))
    for _ in range(80):
        f1 = a * dp + b * c - a ** p * mp
        f2 = b * dn + a * c - b ** p * mn
        if max(abs(f1), abs(f2)) <= 1e-14 * (dp + dn):
            break
        j11 = dp - p * a ** (p - 1.0) * mp
        j22 = dn - p * b ** (p - 1.0) * mn
        det = j11 * j22 - c * c
        da = -(f1 * j22 - c * f2) / det
        db = -(j11 * f2 - f1 * c) / det
        step = 1.0
        while min(a + step * da, b + step * db) <= 0.0:
            step *= 0.5
        a += step * da
        b += step * db
    else:
        raise SolverError("nodal projection did not converge")
    return (a * up + b * un).reshape(v.shape)


# ---------------------------------------------------------------------------
# initial guesses and symmetry projectors

def _ground_state(K, area):
    """Smallest pencil eigenvalue K v = lam * diag(area) v, inverse power."""
    lu = splu(K)
    x = np.ones(area.size)
    lam_prev = math.inf
    for _ in range(300):
        y = lu.solve(area * x)
        y /= math.sqrt(float(y @ (area * y)))
        lam = float(y @ (K @ y))
        if abs(lam - lam_prev) <= 1e-13 * lam:
            if y[int(np.argmax(np.abs(y)))] < 0:
                y = -y
            return lam, y
        lam_prev = lam
        x = y
    raise SolverError("inverse power iteration did not converge")


def _tower_guess(grid: PlanarGrid, p: float, rad=None):
    """Concentric cap-plus-ring guess calibrated on the one-node radial
    profile: amplitudes from its center and trough values, widths from
    the concentration-scale formula at those values."""
    if grid.kind != "polar":
        raise ValueError("the bubble-tower guess needs a polar grid")
    if rad is None:
        rad = solve_radial(p, k=1)
    u0 = rad.center_value
    i = int(np.argmin(rad.values))
    r_tr, u_tr = float(rad.mesh.nodes[i]), float(rad.values[i])
    mu_minus = predicted_scale(p, u_tr)
    prof = bubble_tower(grid.rings, u0, predicted_scale(p, u0),
                        u_tr, mu_minus,
                        minus_params=singular_params(r_tr / mu_minus),
                        sharp=p)
    return np.repeat(prof[:, None], grid.shape[1], axis=1).ravel()


def _tower_grid(domain: DomainSpec, p: float, rad) -> PlanarGrid:
    """Polar grid graded for the two-scale tower structure.

    A log-spaced ring ladder reaches below the center cap width, with
    enough rings that the spacing at the trough radius stays under a
    third of the trough width.  Both scales come from the radial profile
    being mimicked.
    """
    mu_plus = predicted_scale(p, rad.center_value)
    i = int(np.argmin(rad.values))
    r_tr = float(rad.mesh.nodes[i])
    mu_minus = predicted_scale(p, float(rad.values[i]))
    if mu_plus >= 0.09:
        return build_planar_grid(domain, _DEFAULT_RESOLUTION)
    density = math.log(1.0 + mu_minus / (3.0 * r_tr))
    nr = max(_DEFAULT_RESOLUTION,
             int(math.ceil(math.log(10.0 / mu_plus) / density)))
    return build_planar_grid(domain, nr, focus=mu_plus)


def _eigen_guess(grid: PlanarGrid):
    """Antisymmetric low-mode combination with an interior sign change."""
    if grid.kind == "cartesian":
        nx, ny = grid.shape
        w, h = grid.h * (nx + 1), grid.h * (ny + 1)
        xs = grid.h * (1 + np.arange(nx))[:, None] / w
        ys = grid.h * (1 + np.arange(ny))[None, :] / h
        out = np.sin(2 * np.pi * xs) * np.sin(np.pi * ys)
        if nx == ny:
            out = out - out.T        # odd across the diagonal
        return out.ravel()
    R = grid.rings[:, None]
    T = grid.thetas[None, :]
    return (np.sin(np.pi * R) * np.cos(T)).ravel()


def _symmetry_projector(grid: PlanarGrid, s: int):
    """Average over the rotation group of order s (exact index shifts)."""
    if grid.kind != "polar":
        raise ValueError("rotation symmetry enforcement needs a polar grid")
    nr, nt = grid.shape
    if nt % s:
        raise ValueError(f"angular count {nt} is not a multiple of the "
                         f"symmetry order {s}")
    shift = nt // s

    def proj(u):
        v = u.reshape(nr, nt)
        acc = np.zeros_like(v)
        for j in range(s):
            acc += np.roll(v, j * shift, axis=1)
        return (acc / s).ravel()
    return proj


def _antisym_projector(grid: PlanarGrid):
    nx, ny = grid.shape

    def proj(u):
        v = u.reshape(nx, ny)
        return (0.5 * (v - v.T)).ravel()
    return proj


# ---------------------------------------------------------------------------
# Newton solver

def _scaled_sup(ed, p, u, fu=None):
    if fu is None:
        fu, D = _flux_residual(ed, p, u, with_scale=True)
    else:
        _, D = _flux_residual(ed, p, u, with_scale=True)
    return float(np.max(np.abs(fu) / D))


def _newton(K, ed, p, u0, project=None, tol=1e-9, max_iter=80):
    """Damped Newton on F(u) = K u - area |u|^{p-1} u.

    Convergence is the componentwise backward error max |F_i| / D_i
    (see PlanarField.residual); the Armijo backtracking norm carries the
    same weights, frozen at the current iterate.  The Newton system is
    solved in a symmetrically equilibrated frame (rows and columns
    scaled by sqrt of the defect weights) with one step of iterative
    refinement, which keeps the direction accurate when cell areas span
    a dozen orders of magnitude on focused grids.  The optional
    projector restores a discrete symmetry after every trial step.
    """
    u = np.asarray(u0, dtype=float).ravel().copy()
    if project is not None:
        u = project(u)
    fu, D = _flux_residual(ed, p, u, with_scale=True)
    for it in range(1, max_iter + 1):
        res = float(np.max(np.abs(fu) / D))
        if res <= tol:
            return u, it - 1, res
        w = 1.0 / D
        phi = float(np.sum((w * fu) ** 2))
        J = planar_hessian(K, ed[5], p, u)
        s = np.sqrt(w)
        S = diags(s)
        try:
            lu = splu((S @ J @ S).tocsc())
        except RuntimeError as exc:
            raise SolverError(f"singular linearization: {exc}") from exc
        y = lu.solve(-(s * fu))
        y -= lu.solve(s * (J @ (s * y)) + s * fu)
        delta = s * y
        step = 1.0
        while True:
            u_try = u + step * delta
            if project is not None:
                u_try = project(u_try)
            f_try, D_try = _flux_residual(ed, p, u_try, with_scale=True)
            if float(np.sum((w * f_try) ** 2)) <= phi * (1.0 - 1e-4 * step) ** 2:
                break
            step *= 0.5
            if step < 2.0 ** -30:
                raise SolverError(
                    f"line search stalled at residual {res:.3e}")
        u, fu, D = u_try, f_try, D_try
    res = float(np.max(np.abs(fu) / D))
    raise SolverError(f"no convergence in {max_iter} iterations, "
                      f"residual {res:.3e}")


def _check_p(p: float):
    if p <= 1.0:
        raise ValueError(f"exponent must exceed 1, got {p}")
    if p > P_CAP:
        raise ValueError(f"exponent {p} beyond the 2-D grid cap {P_CAP}; "
                         "use the radial solver for the large-p regime")


def _default_grid(domain: DomainSpec | None, grid: PlanarGrid | None):
    if grid is not None:
        return grid
    return build_planar_grid(domain if domain is not None else unit_disk(),
                             _DEFAULT_RESOLUTION)


# ---------------------------------------------------------------------------
# nodal-line geometry

def _nodal_geometry(grid: PlanarGrid, V: np.ndarray) -> dict:
    """Where the zero level set sits: farthest/closest distance from the
    domain center and whether the set runs into the boundary."""
    radii = []
    if grid.kind == "cartesian":
        nx, ny = grid.shape
        cx = 0.5 * grid.h * (nx + 1)
        cy = 0.5 * grid.h * (ny + 1)
        xs = grid.h * (1 + np.arange(nx))
        ys = grid.h * (1 + np.arange(ny))
        for i, j in zip(*np.nonzero(V[:-1] * V[1:] < 0)):
            t = V[i, j] / (V[i, j] - V[i + 1, j])
            radii.append(np.hypot(xs[i] + t * grid.h - cx, ys[j] - cy))
        for i, j in zip(*np.nonzero(V[:, :-1] * V[:, 1:] < 0)):
            t = V[i, j] / (V[i, j] - V[i, j + 1])
            radii.append(np.hypot(xs[i] - cx, ys[j] + t * grid.h - cy))
        edge = np.concatenate([V[0], V[-1], V[:, 0], V[:, -1]])
        touches = bool(edge.min() < 0 < edge.max())
    else:
        rc = grid.rings
        for i, j in zip(*np.nonzero(V[:-1] * V[1:] < 0)):
            t = V[i, j] / (V[i, j] - V[i + 1, j])
            radii.append(rc[i] + t * (rc[i + 1] - rc[i]))
        W = np.roll(V, -1, axis=1)
        for i, _ in zip(*np.nonzero(V * W < 0)):
            radii.append(rc[i])
        touches = bool(V[-1].min() < 0 < V[-1].max())
        if V[0].min() < 0 < V[0].max():
            radii.append(0.0)        # the set crosses the innermost ring
    radii = np.asarray(radii, dtype=float)
    return {"touches_boundary": touches,
            "reach": float(radii.max()) if radii.size else 0.0,
            "clearance": float(radii.min()) if radii.size else 0.0}


# ---------------------------------------------------------------------------
# solvers

def solve_positive(p: float, domain: DomainSpec | None = None,
                   grid: PlanarGrid | None = None, init=None,
                   tol: float = 1e-9) -> PlanarField:
    """Positive state by damped Newton from a Nehari-projected guess.

    The default guess is the ground Dirichlet eigenfunction scaled onto
    the Nehari manifold; a converged field that is not strictly positive
    on the interior is rejected as a wrong branch.  On the disk, when
    the predicted concentration scale falls below the uniform ring
    spacing, the grid is refocused onto that scale and the guess is
    taken from the radial profile instead.
    """
    _check_p(p)
    seed = None
    if grid is None and init is None:
        dom = domain if domain is not None else unit_disk()
        if dom.kind == DISK:
            rad = solve_radial(p, k=0)
            mu = predicted_scale(p, rad.center_value)
            if mu < 0.09:
                nr = max(_DEFAULT_RESOLUTION,
                         int(math.ceil(20.0 * math.log10(10.0 / mu))))
                grid = build_planar_grid(dom, nr, focus=mu)
                seed = np.repeat(rad.u(grid.rings)[:, None],
                                 grid.shape[1], axis=1)
    grid = _default_grid(domain, grid)
    K, area = operators(grid)
    if init is None:
        if seed is None:
            _, v = _ground_state(K, area)
            u0 = nehari_project(grid, v, p)
        else:
            u0 = nehari_project(grid, seed, p)
    else:
        u0 = np.asarray(init, dtype=float).ravel()
        if u0.size != area.size:
            raise ValueError("initial guess does not match the grid size")
    u, iters, res = _newton(K, _edges(grid), p, u0, tol=tol)
    if u.min() <= 0.0:
        raise SolverError("converged field is not positive; "
                          "the iteration left the ground-state branch")
    meta = {"iterations": iters, "residual": res, "symmetry": None,
            "branch": "positive"}
    return PlanarField(grid, p, u.reshape(grid.shape), meta)


def solve_nodal(p: float, domain: DomainSpec | None = None,
                grid: PlanarGrid | None = None, symmetry: int | None = None,
                init="tower", tol: float = 1e-9) -> PlanarField:
    """Sign-changing state; init is "tower", "eigen", or an array.

    The tower guess concentrates a positive cap at the center inside a
    negative ring, calibrated on the one-node radial profile; the eigen
    guess is an antisymmetric low-mode pattern whose nodal line reaches
    the boundary.  If a rotation order is given (or the domain is a
    sector) the orbit average is applied after every Newton step, making
    the field exactly equivariant on the grid.
    """
    _check_p(p)
    rad = None
    named = init if isinstance(init, str) else None
    if grid is None and named == "tower":
        dom = domain if domain is not None else unit_disk()
        if dom.kind in (DISK, DISK_SECTOR):
            rad = solve_radial(p, k=1)
            grid = _tower_grid(dom, p, rad)
    grid = _default_grid(domain, grid)
    if named == "eigen" and p > _EIGEN_DIRECT:
        # from the low-mode seed, damped Newton only reaches moderate
        # exponents; beyond that, solve where it does and continue up
        base = solve_nodal(_EIGEN_DIRECT, grid=grid, symmetry=symmetry,
                           init="eigen", tol=tol)
        family = continue_in_p(base, p, tol=tol)
        out = family[-1]
        if not out.metadata["continuation"]["complete"]:
            raise SolverError(f"continuation of the low-mode branch "
                              f"stalled at p={out.p:g} short of {p:g}")
        del out.metadata["continuation"]
        out.metadata["init"] = "eigen"
        out.metadata["staged_from"] = _EIGEN_DIRECT
        return out
    K, area = operators(grid)
    if symmetry is None and grid.domain.kind == DISK_SECTOR:
        symmetry = grid.domain.symmetry
    project = None
    antisym = False
    if symmetry is not None:
        if symmetry < 1:
            raise ValueError("symmetry order must be a positive integer")
        project = _symmetry_projector(grid, int(symmetry))

    if isinstance(init, str):
        if init == "tower":
            u0 = _tower_guess(grid, p, rad)
        elif init == "eigen":
            u0 = _eigen_guess(grid)
            antisym = (grid.kind == "cartesian"
                       and grid.shape[0] == grid.shape[1])
            if antisym and project is None:
                project = _antisym_projector(grid)
        else:
            raise ValueError(f"unknown init {init!r}; use 'tower', 'eigen', "
                             "or an array")
        u0 = nodal_nehari_project(grid, u0, p).ravel()
    else:
        u0 = np.asarray(init, dtype=float).ravel()
        if u0.size != area.size:
            raise ValueError("initial guess does not match the grid size")

    u, iters, res = _newton(K, _edges(grid), p, u0, project=project, tol=tol)
    V = u.reshape(grid.shape)
    if not (V.min() < 0.0 < V.max()):
        raise SolverError("iteration collapsed onto a one-signed field; "
                          "retry with a different initial guess")
    meta = {"iterations": iters, "residual": res, "symmetry": symmetry,
            "branch": "nodal", "init": init if isinstance(init, str) else "array",
            "antisymmetric": antisym, "nodal": _nodal_geometry(grid, V)}
    return PlanarField(grid, p, V, meta)


def continue_in_p(sol: PlanarField, p_target: float, schedule=None,
                  tol: float = 1e-9) -> list:
    """Family of converged fields from sol.p up to p_target.

    Each step reprojects the previous field onto its Nehari set at the
    new exponent and re-solves; a failed step is bisected geometrically.
    When a step cannot be shrunk any further the family is returned as
    far as it got, flagged incomplete in the last field's metadata.
    """
    if p_target <= sol.p:
        raise ValueError("continuation target must exceed the starting exponent")
    _check_p(p_target)
    grid = sol.grid
    K, area = operators(grid)
    nodal = sol.sign_changing
    project = None
    if sol.metadata.get("symmetry"):
        project = _symmetry_projector(grid, int(sol.metadata["symmetry"]))
    elif sol.metadata.get("antisymmetric"):
        project = _antisym_projector(grid)

    if schedule is None:
        n = max(1, int(math.ceil(math.log(p_target / sol.p) / math.log(1.25))))
        pending = [float(q) for q in np.geomspace(sol.p, p_target, n + 1)[1:]]
    else:
        pending = sorted(float(q) for q in schedule)
        if pending and (pending[0] <= sol.p or pending[-1] != p_target):
            raise ValueError("schedule must increase from above sol.p "
                             "to exactly p_target")

    fields = [sol]
    complete = True
    while pending:
        q = pending[0]
        prev = fields[-1]
        if nodal:
            u0 = nodal_nehari_project(grid, prev.values, q).ravel()
        else:
            u0 = nehari_project(grid, prev.values, q).ravel()
        try:
            u, iters, res = _newton(K, _edges(grid), q, u0, project=project,
                                    tol=tol)
        except SolverError:
            if q / prev.p < 1.0005:
                complete = False
                break
            pending.insert(0, math.sqrt(prev.p * q))
            continue
        V = u.reshape(grid.shape)
        ok = (V.min() < 0.0 < V.max()) if nodal else (V.min() > 0.0)
        if not ok:
            complete = False
            break
        meta = {"iterations": iters, "residual": res,
                "symmetry": sol.metadata.get("symmetry"),
                "branch": prev.metadata.get("branch"),
                "antisymmetric": sol.metadata.get("antisymmetric", False)}
        if nodal:
            meta["nodal"] = _nodal_geometry(grid, V)
        fields.append(PlanarField(grid, q, V, meta))
        pending.pop(0)
    fields[-1].metadata["continuation"] = {
        "target": p_target, "reached": fields[-1].p, "complete": complete
        and fields[-1].p == p_target}
    return fields
