"""Linearized spectra: principal eigenvalues and Morse indices.

The linearization of the problem at a solution u is L = -Δ - p|u|^{p-1}.
For a radial u on the disk, separation into angular modes e^{ijθ} reduces L
to a family of 1-D operators, and the log substitution r = e^t turns each
into a Schrödinger form on (-∞, 0]:

    Q_j(g) = ∫ (g'² + j² g² - p|v(t)|^{p-1} g²) dt,

where v is the bounded log-variable profile.  The potential p|v|^{p-1} is
O(1) uniformly in p — this is what makes Morse indices at p ~ 1000
computable at all; in r the coefficient spans hundreds of decades.  The
Morse index is then count(j=0) + 2 Σ_{j≥1} count(j), each count being the
number of negative Dirichlet eigenvalues of Q_j (Neumann at the inner
truncation for j=0 on the ball, since those modes need not vanish at the
origin).

Counts are certified two ways: Sturm sequences give the exact inertia of
each discretized pencil, and the smallest eigenvalues are extrapolated from
meshes h and h/2 (the scheme is O(h²), so (4λ_{h/2} - λ_h)/3 removes the
leading error).  Near-zero modes — discrete shadows of the translation and
dilation quasi-modes of the limiting planar problem — land in an explicit
indeterminate band instead of silently tipping the count.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal, ldl, solve_banded
from scipy.sparse import identity, kron, diags
from scipy.sparse.linalg import splu, eigsh

from .geometry import (ANNULUS, DISK, DISK_SECTOR, RECTANGLE, DomainSpec,
                       unit_disk)
from .radial import RadialSolution, SolverError, _powsgn

_ZERO_BAND = 1e-8     # relative half-width of the indeterminate band


@dataclass
class SpectrumReport:
    """Morse index computation record for one solution."""

    total: int
    counts: dict                   # angular mode -> negative eigenvalue count
    eigenvalues: dict              # angular mode -> extrapolated smallest few
    indeterminate: list            # (mode, eigenvalue) pairs inside the band
    j_max: int
    h: float
    details: dict = field(default_factory=dict)

    @property
    def is_clean(self) -> bool:
        return not self.indeterminate


def _mode_matrices(tgrid_h, W, j, neumann_left):
    """Tridiagonal (K, M) for Q_j on the truncated log interval.

    Dirichlet at the right end always; the left end is Neumann (half cell)
    for the j = 0 ball mode and Dirichlet otherwise.
    """
    h = tgrid_h[1] - tgrid_h[0]
    if neumann_left:
        Wn = W[:-1]                          # keep the left node, drop t = 0
        n = Wn.size
        kd = np.full(n, 2.0 / h)
        kd[0] = 1.0 / h
        cell = np.full(n, h)
        cell[0] = h / 2.0
    else:
        Wn = W[1:-1]
        n = Wn.size
        kd = np.full(n, 2.0 / h)
        cell = np.full(n, h)
    kd = kd + cell * (j * j - Wn)
    ko = np.full(n - 1, -1.0 / h)
    md = cell * (1.0 + np.maximum(Wn, 0.0))
    return kd, ko, md


def _sturm_negatives(kd, ko):
    """Number of negative eigenvalues of the tridiagonal matrix via the
    LDLᵀ pivot recurrence (no factorization breakdown for shifted 0)."""
    neg = 0
    d = kd[0]
    if d < 0:
        neg += 1
    for i in range(1, kd.size):
        denom = d if abs(d) > 1e-300 else math.copysign(1e-300, d if d != 0 else 1.0)
        d = kd[i] - ko[i - 1] ** 2 / denom
        if d < 0:
            neg += 1
    return neg


def _smallest_pencil_eigs(kd, ko, md, nev):
    s = 1.0 / np.sqrt(md)
    d = kd * s * s
    e = ko * s[:-1] * s[1:]
    nev = min(nev, d.size)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, nev - 1),
                            eigvals_only=True)


def _mode_count(build, j, nev=8):
    """Counts and refined eigenvalues for one angular mode.

    build(factor) must return (tgrid, W, neumann_left) at resolution
    h/factor.  Returns (count, refined eigenvalues, indeterminate list,
    sturm count at the fine resolution).
    """
    out = []
    for fac in (1, 2):
        t, W, neu = build(fac)
        kd, ko, md = _mode_matrices(t, W, j, neu)
        lam = _smallest_pencil_eigs(kd, ko, md, nev)
        out.append(lam)
        if fac == 2:
            sturm = _sturm_negatives(kd, ko)
    n = min(len(out[0]), len(out[1]))
    lam_ref = (4.0 * out[1][:n] - out[0][:n]) / 3.0
    scale = max(1.0, float(np.max(np.abs(lam_ref))))
    band = _ZERO_BAND * scale
    count = int(np.count_nonzero(lam_ref < -band))
    indet = [float(x) for x in lam_ref if abs(x) <= band]
    if lam_ref[-1] < 0 and n == nev and nev < 4096:
        # window too small to certify the count
        return _mode_count(build, j, nev=2 * nev)
    # independent counts on the same fine matrix must agree exactly,
    # provided the window reaches past the last fine-grid negative
    fine_neg = int(np.count_nonzero(out[1] < 0))
    if out[1][-1] > 0.0 and fine_neg != sturm:
        raise SolverError(
            f"mode {j}: Sturm inertia {sturm} vs eigenvalue count {fine_neg}")
    return count, lam_ref, indet, sturm


def morse_index_radial(sol: RadialSolution, j_max: int = 12,
                       h: float = 0.04) -> SpectrumReport:
    """Morse index of a radial solution by angular decomposition.

    j_max bounds the angular modes examined; it extends automatically
    (doubling, capped at 32) while the highest mode still contributes, so
    the default is a floor rather than a truncation.
    """
    if sol._traj is None:
        raise ValueError("solution lacks its dense profile; re-solve to analyze")
    traj = sol._traj
    p = sol.p

    if traj.frame == "log":
        ts = traj.t_start

        def build(fac):
            n = int(round(-ts / (h / fac))) + 1
            t = np.linspace(ts, 0.0, n)
            v = np.asarray(traj.sol(t))[0]
            W = p * _powsgn(np.abs(v), p - 1.0)
            return t, W, True
    else:
        t_lo = math.log(sol.domain.inner)

        def build(fac):
            n = int(round(-t_lo / (h / fac))) + 1
            t = np.linspace(t_lo, 0.0, n)
            u = np.asarray(traj.sol(np.exp(t)))[0]
            W = p * _powsgn(np.abs(u), p - 1.0) * np.exp(2.0 * t)
            return t, W, False

    counts, eigenvalues, indeterminate = {}, {}, []
    details = {"sturm": {}}
    jmax_eff = j_max
    j = 0
    neumann0 = traj.frame == "log"
    while j <= jmax_eff:
        def build_j(fac, _j=j):
            t, W, neu = build(fac)
            return t, W, (neu and _j == 0)
        c, lam, indet, sturm = _mode_count(build_j, j)
        counts[j] = c
        eigenvalues[j] = [float(x) for x in lam]
        indeterminate.extend((j, x) for x in indet)
        details["sturm"][j] = sturm
        if j == jmax_eff and c > 0 and jmax_eff < 32:
            jmax_eff = min(2 * jmax_eff, 32)
        j += 1
    total = counts.get(0, 0) + 2 * sum(c for jj, c in counts.items() if jj > 0)
    details["neumann_mode0"] = neumann0
    return SpectrumReport(total, counts, eigenvalues, indeterminate,
                          jmax_eff, h, details)


def quadratic_form(sol: RadialSolution, phi: np.ndarray, j: int = 0) -> float:
    """Q_j(φ) = ∫ (φ'² + j²φ²/r² - p|u|^{p-1}φ²) r dr for φ sampled on the
    solution's mesh (trapezoid rule; φ must vanish where Dirichlet data does)."""
    r = sol.mesh.nodes
    phi = np.asarray(phi, dtype=float)
    if phi.shape != r.shape:
        raise ValueError("test function must be sampled on the solution mesh")
    u = sol.values
    W = sol.p * _powsgn(np.abs(u), sol.p - 1.0)
    dphi = np.gradient(phi, r)
    integrand = (dphi * dphi - W * phi * phi) * r
    if j:
        with np.errstate(divide="ignore", invalid="ignore"):
            ang = np.where(r > 0, j * j * phi * phi / r, 0.0)
        integrand = integrand + ang
    return float(np.trapezoid(integrand, r))


def _radial_lap_pencil(lo, n, jj):
    """Cell-centered FV matrices for -f'' - f'/r + j²f/r² on (lo, 1), no-flux
    at a zero inner radius, Dirichlet outside."""
    faces = np.linspace(lo, 1.0, n + 1)
    h = faces[1] - faces[0]
    r = 0.5 * (faces[:-1] + faces[1:])
    kd = np.empty(n)
    ko = -faces[1:-1] / h
    kd[:-1] = (faces[:-1] + faces[1:])[:-1] / h
    # Dirichlet ghost at r = 1 sits half a cell beyond the last center
    kd[-1] = faces[-2] / h + 2.0 * faces[-1] / h
    if lo > 0:  # inner Dirichlet wall for the annulus
        kd[0] = 2.0 * faces[0] / h + faces[1] / h
    kd = kd + h * jj * jj / r
    md = h * r
    return kd, ko, md


def _rect_lap(width, height, res):
    h = min(width, height) / (res - 1)
    nx = int(round(width / h)) - 1
    ny = int(round(height / h)) - 1
    Tx = diags([np.full(nx - 1, -1.0), np.full(nx, 2.0), np.full(nx - 1, -1.0)],
               (-1, 0, 1))
    Ty = diags([np.full(ny - 1, -1.0), np.full(ny, 2.0), np.full(ny - 1, -1.0)],
               (-1, 0, 1))
    K = (kron(Tx, identity(ny)) + kron(identity(nx), Ty)) / (h * h)
    return K.tocsc(), nx * ny


def _inverse_power_banded(kd, ko, md, tol=1e-12, maxit=400):
    ab = np.zeros((3, kd.size))
    ab[0, 1:] = ko
    ab[1] = kd
    ab[2, :-1] = ko
    x = np.ones(kd.size)
    lam_prev = math.inf
    for _ in range(maxit):
        y = solve_banded((1, 1), ab, md * x)
        y /= math.sqrt(float(np.sum(md * y * y)))
        num = float(np.sum(y * (kd * y)) + 2.0 * np.sum(ko * y[:-1] * y[1:]))
        lam = num
        if abs(lam - lam_prev) <= tol * abs(lam):
            return lam
        lam_prev = lam
        x = y
    raise SolverError("inverse power iteration did not converge")


def _inverse_power_sparse(K, tol=1e-12, maxit=400):
    lu = splu(K)
    n = K.shape[0]
    x = np.ones(n)
    lam_prev = math.inf
    for _ in range(maxit):
        y = lu.solve(x)
        y /= math.sqrt(float(y @ y))
        lam = float(y @ (K @ y))
        if abs(lam - lam_prev) <= tol * abs(lam):
            return lam
        lam_prev = lam
        x = y
    raise SolverError("inverse power iteration did not converge")


def first_eigenvalue(domain: DomainSpec | None = None,
                     resolution: int = 2048) -> float:
    """Principal Dirichlet eigenvalue of -Δ, by inverse power iteration with
    two-mesh Richardson extrapolation (the discretizations are O(h²))."""
    if domain is None:
        domain = unit_disk()
    if resolution < 64:
        raise ValueError("resolution below 64 cannot certify an eigenvalue")
    if domain.kind in (DISK, ANNULUS, DISK_SECTOR):
        # the ground state is radial (disk, annulus) or has the lowest
        # compatible angular wavenumber (sector of angle 2π/s: j = s/2)
        jj = domain.symmetry / 2.0 if domain.kind == DISK_SECTOR else 0.0
        lo = domain.inner
        lams = []
        for n in (resolution, 2 * resolution):
            kd, ko, md = _radial_lap_pencil(lo, n, jj)
            lams.append(_inverse_power_banded(kd, ko, md))
        return (4.0 * lams[1] - lams[0]) / 3.0
    if domain.kind == RECTANGLE:
        res = min(resolution, 192)           # dense enough; keeps kron small
        lams = []
        for r in (res, 2 * res - 1):
            K, _ = _rect_lap(domain.width, domain.height, r)
            lams.append(_inverse_power_sparse(K))
        return (4.0 * lams[1] - lams[0]) / 3.0
    raise ValueError(f"unsupported domain kind {domain.kind!r}")


def planar_hessian(K, M_diag, p, values):
    """Sparse Hessian K - diag(M |u|^{p-1} p) of the energy at a planar
    iterate, shared by the planar Newton solver and the inertia count."""
    W = p * _powsgn(np.abs(values), p - 1.0)
    return (K - diags(M_diag * W)).tocsc()


def morse_index_planar(field, dense_limit: int = 4100) -> dict:
    """Negative-eigenvalue count of the Hessian at a planar field.

    Builds the flux-form pencil of the field's grid and counts negative
    generalized eigenvalues (the area weight is positive, so the matrix
    inertia is the pencil inertia).
    """
    from .planar import operators    # deferred: planar imports this module
    K, area = operators(field.grid)
    return _planar_inertia(K, area, field.p,
                           np.asarray(field.values, dtype=float).ravel(),
                           dense_limit)


def _planar_inertia(K, M_diag, p, values, dense_limit: int = 4100) -> dict:
    """Negative-eigenvalue count of the planar Hessian.

    The Hessian is symmetrically scaled by 1/sqrt(area) first, turning
    the count into the inertia of the generalized pencil, whose negative
    part lives on the physical scale max p|u|^{p-1}.  The count itself
    comes from the pivot signs of an unpivoted sparse LU (each
    elimination step is a congruence, so the signs give the exact
    inertia); a shift-invert probe guards against a spectrum cluster at
    zero, and small grids are cross-checked with a dense LDLᵀ.
    """
    A = planar_hessian(K, M_diag, p, values)
    n = A.shape[0]
    s = 1.0 / np.sqrt(M_diag)
    S = diags(s)
    As = (S @ A @ S).tocsc()
    pot = float(np.max(p * np.abs(values) ** (p - 1.0)))
    band = _ZERO_BAND * max(pot, 1.0)
    try:
        lu = splu(As, permc_spec="NATURAL", diag_pivot_thresh=0.0,
                  options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SolverError(f"Hessian factorization broke down: {exc}") from exc
    if not (np.array_equal(lu.perm_r, np.arange(n))
            and np.array_equal(lu.perm_c, np.arange(n))):
        raise SolverError("pivoting kicked in during the inertia "
                          "factorization; count would be unreliable")
    piv = lu.U.diagonal()
    if not np.all(np.isfinite(piv)) or np.any(piv == 0.0):
        raise SolverError("singular pivot in the inertia factorization; "
                          "Morse count indeterminate")
    count = int(np.count_nonzero(piv < 0.0))
    # eigenvalues of the pencil nearest zero: a near-kernel means the
    # index is about to change and the count is not trustworthy
    lam = eigsh(As, k=min(4, n - 2), sigma=0.0, which="LM",
                return_eigenvectors=False)
    if np.any(np.abs(lam) <= band):
        raise SolverError("eigenvalue cluster at zero; Morse count "
                          "indeterminate")
    out = {"count": count, "method": "lu-inertia", "zero_band": band}
    if n <= dense_limit:
        lower, d, _ = ldl(As.toarray(), lower=True)
        inertia = 0
        i = 0
        while i < n:
            if i + 1 < n and abs(d[i + 1, i]) > 1e-14 * pot:
                # 2x2 block: count its negative eigenvalues directly
                blk = d[i:i + 2, i:i + 2]
                ev = np.linalg.eigvalsh(blk)
                inertia += int(np.count_nonzero(ev < 0))
                i += 2
            else:
                if d[i, i] < 0:
                    inertia += 1
                i += 1
        out.update(method="lu+ldl-inertia", ldl_count=inertia)
        if inertia != count:
            raise SolverError(
                f"inertia mismatch: LU pivots give {count}, LDL {inertia}")
    return out
