"""Domain descriptions and mesh/grid construction.

Supported domains: the unit disk, a concentric annulus, an axis-aligned
rectangle, and the unit disk carrying a prescribed discrete rotational
symmetry.  Radial problems live on 1-D meshes of [0,1] (or [a,1]); planar
problems on structured 5-point grids -- a tensor grid on rectangles, polar
rings on disks.  Everything here is immutable data; the operators built on
top of it live in the solver modules.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

DISK = "disk"
ANNULUS = "annulus"
RECTANGLE = "rectangle"
DISK_SECTOR = "disk-sector"

UNIFORM = "uniform"
LOG_GRADED = "log"


@dataclass(frozen=True)
class DomainSpec:
    """A planar domain, dimensionless, with outer size normalized to 1.

    kind is one of "disk", "annulus", "rectangle", "disk-sector".  The
    annulus is {a < |x| < 1}; the rectangle is (0,w) x (0,h); the sector
    kind is the unit disk together with a rotational symmetry order s
    (the domain itself is still the full disk).
    """

    kind: str
    inner: float = 0.0        # annulus inner radius a
    width: float = 1.0        # rectangle sides
    height: float = 1.0
    symmetry: int = 1         # rotational order for disk-sector

    def __post_init__(self):
        if self.kind not in (DISK, ANNULUS, RECTANGLE, DISK_SECTOR):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == ANNULUS and not 0.0 < self.inner < 1.0:
            raise ValueError(f"annulus inner radius must lie in (0,1), got {self.inner}")
        if self.kind == RECTANGLE and (self.width <= 0 or self.height <= 0):
            raise ValueError("rectangle sides must be positive")
        if self.kind == DISK_SECTOR and (self.symmetry < 1 or self.symmetry != int(self.symmetry)):
            raise ValueError(f"symmetry order must be a positive integer, got {self.symmetry}")

    @property
    def is_radial(self) -> bool:
        return self.kind in (DISK, ANNULUS, DISK_SECTOR)

    def contains(self, pts) -> np.ndarray:
        """Boolean mask: which points (shape (..., 2)) lie inside the open domain."""
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        if self.kind in (DISK, DISK_SECTOR):
            return x * x + y * y < 1.0
        if self.kind == ANNULUS:
            r2 = x * x + y * y
            return (r2 > self.inner**2) & (r2 < 1.0)
        return (x > 0) & (x < self.width) & (y > 0) & (y < self.height)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == ANNULUS:
            d["inner"] = self.inner
        if self.kind == RECTANGLE:
            d["width"], d["height"] = self.width, self.height
        if self.kind == DISK_SECTOR:
            d["symmetry"] = self.symmetry
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        return cls(d["kind"], inner=d.get("inner", 0.0), width=d.get("width", 1.0),
                   height=d.get("height", 1.0), symmetry=d.get("symmetry", 1))


def unit_disk() -> DomainSpec:
    return DomainSpec(DISK)


def annulus(inner: float) -> DomainSpec:
    return DomainSpec(ANNULUS, inner=inner)


def rectangle(width: float, height: float) -> DomainSpec:
    return DomainSpec(RECTANGLE, width=width, height=height)


def unit_square() -> DomainSpec:
    return DomainSpec(RECTANGLE, width=1.0, height=1.0)


def disk_sector(symmetry: int) -> DomainSpec:
    return DomainSpec(DISK_SECTOR, symmetry=symmetry)


@dataclass(frozen=True)
class RadialMesh:
    """Strictly increasing radii r_0 = 0 (or a) ... r_{N-1} = 1.

    Log-graded meshes are geometric toward the origin with a focus scale:
    concentration profiles of width mu are unresolvable on uniform meshes
    once mu drops below the spacing, which happens already for p ~ 30.
    """

    nodes: np.ndarray
    grading: str = UNIFORM
    focus: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 64:
            raise ValueError(f"mesh needs at least 64 nodes, got {nodes.size}")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if self.grading not in (UNIFORM, LOG_GRADED):
            raise ValueError(f"unknown grading {self.grading!r}")
        if self.grading == LOG_GRADED:
            if not self.focus > 0:
                raise ValueError("log grading needs a positive focus scale")
            if np.count_nonzero(nodes <= 10.0 * self.focus) < 16:
                raise ValueError("log-graded mesh must put >= 16 nodes inside [0, 10*focus]")

    @property
    def n(self) -> int:
        return self.nodes.size

    def to_dict(self) -> dict:
        return {"grading": self.grading, "focus": self.focus,
                "nodes": [float(r) for r in self.nodes]}

    @classmethod
    def from_dict(cls, d: dict) -> "RadialMesh":
        return cls(np.asarray(d["nodes"], dtype=float), d["grading"], d.get("focus", 0.0))


def build_radial_mesh(domain: DomainSpec, n: int, grading: str = UNIFORM,
                      focus: float | None = None) -> RadialMesh:
    """Mesh of [0,1] (disk) or [a,1] (annulus) with n nodes.

    Log grading places half the nodes geometrically between focus/10 and 1
    and the rest below, down to focus*1e-4; only meaningful on the disk,
    where the structure it resolves sits at the origin.
    """
    if not domain.is_radial and domain.kind != ANNULUS:
        raise ValueError(f"radial meshes need a disk or annulus domain, got {domain.kind!r}")
    if n < 64:
        raise ValueError(f"need n >= 64 nodes, got {n}")
    if grading == UNIFORM:
        lo = domain.inner if domain.kind == ANNULUS else 0.0
        return RadialMesh(np.linspace(lo, 1.0, n), UNIFORM)
    if grading != LOG_GRADED:
        raise ValueError(f"unknown grading {grading!r}")
    if domain.kind == ANNULUS:
        raise ValueError("log grading targets the origin; annulus meshes are uniform")
    if focus is None or not focus > 0:
        raise ValueError("log grading needs a positive focus scale")
    if focus >= 0.1:
        # grading degenerates; a uniform mesh already resolves this scale
        return RadialMesh(np.linspace(0.0, 1.0, n), UNIFORM)
    n_up = n // 2
    n_low = n - n_up - 1
    upper = np.geomspace(focus / 10.0, 1.0, n_up)
    lower = np.geomspace(focus * 1e-4, focus / 10.0, n_low, endpoint=False)
    nodes = np.concatenate(([0.0], lower, upper))
    return RadialMesh(nodes, LOG_GRADED, focus)


@dataclass(frozen=True)
class PlanarGrid:
    """Structured interior grid for the 5-point Laplacian.

    Cartesian grids cover a rectangle with square cells of side h; shape is
    the interior node count (nx, ny) and boundary values are identically 0.
    Polar grids cover the disk with rings centered between the faces in
    `rfaces` (first face at r=0, so the innermost ring sits at dr/2 and the
    r=0 coordinate singularity never enters the stencil) and `shape[1]`
    equispaced angles.
    """

    domain: DomainSpec
    kind: str                     # "cartesian" | "polar"
    shape: tuple
    h: float
    rfaces: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("cartesian", "polar"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if self.kind == "polar":
            faces = np.asarray(self.rfaces, dtype=float)
            object.__setattr__(self, "rfaces", faces)
            if faces[0] != 0.0 or abs(faces[-1] - 1.0) > 1e-14 or not np.all(np.diff(faces) > 0):
                raise ValueError("polar faces must increase from 0 to 1")
            if faces.size - 1 != self.shape[0]:
                raise ValueError("face count inconsistent with ring count")

    @property
    def interior_count(self) -> int:
        return int(self.shape[0] * self.shape[1])

    @property
    def rings(self) -> np.ndarray:
        """Ring center radii (polar grids)."""
        f = self.rfaces
        return 0.5 * (f[:-1] + f[1:])

    @property
    def thetas(self) -> np.ndarray:
        nt = self.shape[1]
        return 2.0 * np.pi * np.arange(nt) / nt

    def xy(self) -> np.ndarray:
        """Interior node coordinates, shape (interior_count, 2), C-ordered to match
        flattened value arrays (x fastest / theta fastest)."""
        if self.kind == "cartesian":
            nx, ny = self.shape
            xs = self.h * (1 + np.arange(nx))
            ys = self.h * (1 + np.arange(ny))
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            return np.column_stack([X.ravel(), Y.ravel()])
        R, T = np.meshgrid(self.rings, self.thetas, indexing="ij")
        return np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])

    def to_dict(self) -> dict:
        d = {"domain": self.domain.to_dict(), "kind": self.kind,
             "shape": [int(s) for s in self.shape], "h": self.h}
        if self.kind == "polar":
            d["rfaces"] = [float(r) for r in self.rfaces]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PlanarGrid":
        faces = np.asarray(d["rfaces"], dtype=float) if "rfaces" in d else None
        return cls(DomainSpec.from_dict(d["domain"]), d["kind"],
                   tuple(d["shape"]), d["h"], faces)


def build_planar_grid(domain: DomainSpec, resolution: int,
                      focus: float | None = None, ntheta: int | None = None) -> PlanarGrid:
    """Grid with `resolution` nodes across the shortest side (boundary included).

    Rectangles get a cartesian grid whose spacing divides both sides exactly
    (sides must be commensurable).  Disks get a polar grid with `resolution`
    rings; pass `focus` to grade the rings geometrically toward the origin.
    """
    if resolution < 32:
        raise ValueError(f"resolution must be >= 32, got {resolution}")
    if domain.kind == RECTANGLE:
        short = min(domain.width, domain.height)
        h = short / (resolution - 1)
        nx = domain.width / h
        ny = domain.height / h
        if abs(nx - round(nx)) > 1e-9 or abs(ny - round(ny)) > 1e-9:
            raise ValueError("rectangle sides must be integer multiples of the spacing")
        return PlanarGrid(domain, "cartesian", (int(round(nx)) - 1, int(round(ny)) - 1), h)
    if domain.kind in (DISK, DISK_SECTOR):
        nr = resolution
        if ntheta is None:
            ntheta = 64
        if domain.kind == DISK_SECTOR and ntheta % domain.symmetry != 0:
            ntheta = domain.symmetry * math.ceil(ntheta / domain.symmetry)
        if focus is not None and focus > 0 and focus < 0.1:
            faces = np.concatenate(([0.0], np.geomspace(max(focus / 10.0, 1e-12), 1.0, nr)))
        else:
            faces = np.linspace(0.0, 1.0, nr + 1)
        return PlanarGrid(domain, "polar", (nr, ntheta), float(np.max(np.diff(faces))),
                          faces)
    raise ValueError(f"no planar grid for domain kind {domain.kind!r}")
