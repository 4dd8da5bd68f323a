"""Command-line driver: single solves, analysis, sweeps, plot tables.

Subcommands cover one-off solves (solve-radial, solve-planar), analysis
of serialized solutions (analyze, morse, limits, profiles), and
config-driven sweeps (run) with table emission (report).  Sweeps persist
a manifest keyed by a hash of the config file, write every artifact
atomically, skip entries already completed, and produce byte-identical
outputs for identical config and seed.

Exit codes: 0 success, 1 validation error, 2 solver failure, 3 a
declared trend/limit check failed.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import argparse
import hashlib
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .asymptotics import (energy_report, extract_concentration_points,
                          nodal_metrics, rescale)
from .geometry import DomainSpec, annulus, disk_sector, rectangle, unit_disk
from .green import check_green_limit
from .planar import PlanarField, solve_nodal, solve_positive
from .profiles import regular_bubble, singular_bubble, singular_params
from .radial import RadialSolution, SolverError, solve_radial
from .spectrum import morse_index_planar, morse_index_radial

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3

EIGHT_PI_E = 68.317873781388537


# ---------------------------------------------------------------------------
# small deterministic-output helpers

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "),
                      indent=1) + "\n"


def _columns(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _two_column(pairs) -> str:
    return "".join(" ".join(_fmt(v) for v in row) + "\n" for row in pairs)


def _parse_domain(text: str) -> DomainSpec:
    head, _, tail = text.partition(":")
    if head == "disk":
        return unit_disk()
    if head == "square":
        return rectangle(1.0, 1.0)
    if head == "rect":
        w, _, h = tail.partition("x")
        return rectangle(float(w), float(h))
    if head == "annulus":
        return annulus(float(tail) if tail else 0.5)
    if head == "sector":
        return disk_sector(int(tail) if tail else 4)
    raise ValueError(f"unknown domain {text!r}; use disk, square, "
                     "rect:WxH, annulus:INNER, or sector:S")


def _load_solution(path: str):
    with open(path) as fh:
        d = json.load(fh)
    kind = d.get("kind")
    if kind == "radial-solution":
        return RadialSolution.from_dict(d)
    if kind == "planar-field":
        return PlanarField.from_dict(d)
    raise ValueError(f"{path}: unrecognized solution kind {kind!r}")


# ---------------------------------------------------------------------------
# experiment configuration

_ANALYSES = ("concentration", "morse", "nodal", "green")


@dataclass
class ExperimentConfig:
    """Sweep description parsed from a flat key=value file."""

    solver: str = "radial"
    domain: str = "disk"
    p_list: tuple = ()
    nodes: int = 0
    symmetry: int | None = None
    init: str = "tower"
    analyses: tuple = ()
    out_dir: str = "runs"
    tol: float = 1e-9
    seed: int | None = None
    cstar: float = 64.0
    jmax: int = 12
    energy_rtol: float = 0.15

    def domain_spec(self) -> DomainSpec:
        return _parse_domain(self.domain)


def parse_config(path: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    seen = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            seen[key] = val
    if "p_values" in seen and "p_start" in seen:
        raise ValueError("give either p_values or a p_start ladder, not both")
    if "p_values" in seen:
        cfg.p_list = tuple(float(s) for s in seen.pop("p_values").split(","))
    elif "p_start" in seen:
        start = float(seen.pop("p_start"))
        stop = float(seen.pop("p_stop"))
        factor = float(seen.pop("p_factor", "2"))
        if factor <= 1.0 or start <= 1.0 or stop < start:
            raise ValueError("ladder needs p_start > 1, p_stop >= p_start, "
                             "p_factor > 1")
        vals = [start]
        while vals[-1] * factor <= stop * (1.0 + 1e-12):
            vals.append(vals[-1] * factor)
        cfg.p_list = tuple(vals)
    for key, val in seen.items():
        if key == "solver":
            if val not in ("radial", "planar"):
                raise ValueError(f"solver must be radial or planar, got {val!r}")
            cfg.solver = val
        elif key == "domain":
            _parse_domain(val)
            cfg.domain = val
        elif key == "nodes":
            cfg.nodes = int(val)
        elif key == "symmetry":
            cfg.symmetry = int(val)
        elif key == "init":
            if val not in ("tower", "eigen", "random"):
                raise ValueError("init must be tower, eigen, or random")
            cfg.init = val
        elif key == "analyses":
            parts = tuple(s.strip() for s in val.split(",") if s.strip())
            bad = [s for s in parts if s not in _ANALYSES]
            if bad:
                raise ValueError(f"unknown analyses {bad}; pick from {_ANALYSES}")
            cfg.analyses = parts
        elif key == "out_dir":
            cfg.out_dir = val
        elif key == "tol":
            cfg.tol = float(val)
        elif key == "seed":
            cfg.seed = int(val)
        elif key == "cstar":
            cfg.cstar = float(val)
        elif key == "jmax":
            cfg.jmax = int(val)
        elif key == "energy_rtol":
            cfg.energy_rtol = float(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if not cfg.p_list:
        raise ValueError("config must list exponents via p_values or a ladder")
    if any(p <= 1.0 for p in cfg.p_list):
        raise ValueError("every exponent must exceed 1")
    if any(b <= a for a, b in zip(cfg.p_list, cfg.p_list[1:])):
        raise ValueError("exponents must be strictly increasing")
    if cfg.nodes < 0:
        raise ValueError("nodes must be nonnegative")
    return cfg


def _config_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# single solves

def _random_init(dom: DomainSpec, p: float, seed, signed: bool,
                 noise_amp: float):
    """Seeded low-mode guess: a randomly oriented dipole (or bump) plus
    smooth noise.  Fully random fields sit outside every Newton basin;
    the seed picks the orientation, sign, and perturbation instead."""
    from .planar import _default_grid, nehari_project, nodal_nehari_project
    grid = _default_grid(dom, None)
    rng = np.random.default_rng(0 if seed is None else seed)
    nx, ny = grid.shape
    if grid.kind == "cartesian":
        xs = np.linspace(0.0, math.pi, nx + 2)[1:-1][:, None]
        ys = np.linspace(0.0, math.pi, ny + 2)[1:-1][None, :]
        bump = np.sin(xs) * np.sin(ys)
        if rng.integers(2):
            dip = np.sin(2 * xs) * np.sin(ys)
        else:
            dip = np.sin(xs) * np.sin(2 * ys)
        noise = sum(rng.standard_normal() * np.sin(kx * xs) * np.sin(ky * ys)
                    for kx in (1, 2) for ky in (1, 2))
    else:
        rr = grid.rings[:, None]
        th = grid.thetas[None, :]
        bump = np.cos(0.5 * math.pi * rr) * np.ones_like(th)
        dip = np.sin(math.pi * rr) * np.cos(th - rng.uniform(0.0, 2 * math.pi))
        noise = (np.sin(math.pi * rr)
                 * sum(rng.standard_normal() * np.cos(k * th - rng.uniform(0.0, 2 * math.pi))
                       for k in (0, 1, 2)))
    base = dip if signed else bump
    scale = noise_amp * np.max(np.abs(base)) / max(np.max(np.abs(noise)), 1e-30)
    if signed:
        sgn = 1.0 if rng.integers(2) else -1.0
        v = sgn * dip + scale * noise
        return grid, nodal_nehari_project(grid, v, p)
    v = np.abs(bump + scale * noise)
    return grid, nehari_project(grid, v, p)


_RANDOM_DIRECT = 3.0  # solve the seeded guess here, continue beyond


def _solve_planar_entry(p, dom, nodes, symmetry, init, tol, seed):
    from .planar import continue_in_p
    if init != "random":
        if nodes == 0:
            return solve_positive(p, domain=dom, tol=tol)
        return solve_nodal(p, domain=dom, symmetry=symmetry, init=init, tol=tol)
    p0 = min(p, _RANDOM_DIRECT)
    out = None
    # back off the noise until Newton cooperates; the seeded orientation
    # is a symmetry of the problem and survives every fallback
    for amp in (0.25, 0.1, 0.02, 0.0):
        grid, u0 = _random_init(dom, p0, seed, nodes > 0, amp)
        try:
            if nodes == 0:
                out = solve_positive(p0, grid=grid, init=u0.ravel(), tol=tol)
            else:
                out = solve_nodal(p0, grid=grid, symmetry=symmetry,
                                  init=u0.ravel(), tol=tol)
            break
        except SolverError:
            if amp == 0.0:
                raise
    if p0 < p:
        family = continue_in_p(out, p, tol=tol)
        out = family[-1]
        if not out.metadata["continuation"]["complete"]:
            raise SolverError(f"continuation of the seeded branch stalled "
                              f"at p={out.p:g} short of {p:g}")
        del out.metadata["continuation"]
        out.metadata["staged_from"] = p0
    out.metadata["init"] = "random"
    out.metadata["seed"] = 0 if seed is None else int(seed)
    return out


def cmd_solve_radial(args) -> int:
    dom = _parse_domain(args.domain)
    sol = solve_radial(args.p, k=args.nodes, domain=dom)
    text = _dump_json(sol.to_dict())
    if args.out:
        _atomic_write(args.out, text)
        print(f"p={_fmt(sol.p)} nodes={sol.nodal_count} "
              f"sup={_fmt(sol.sup_norm)} -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve_planar(args) -> int:
    dom = _parse_domain(args.domain)
    nodes = args.nodes if args.nodes is not None else (1 if args.init else 0)
    fld = _solve_planar_entry(args.p, dom, nodes, args.sym,
                              args.init or "tower", args.tol, args.seed)
    text = _dump_json(fld.to_dict())
    if args.out:
        _atomic_write(args.out, text)
        print(f"p={_fmt(fld.p)} branch={fld.metadata.get('branch')} "
              f"residual={_fmt(fld.metadata.get('residual'))} -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analysis of serialized solutions

def _signed(obj) -> bool:
    if isinstance(obj, RadialSolution):
        return obj.nodal_count > 0
    return obj.sign_changing


def cmd_analyze(args) -> int:
    obj = _load_solution(args.solution)
    rep = extract_concentration_points(obj, cstar=args.cstar)
    out = {
        "p": obj.p,
        "energy": {k: v for k, v in sorted(energy_report(obj).items())},
        "concentration": {
            "count": rep.count,
            "points": [[float(a) for a in x] for x in rep.points],
            "scales": [float(s) for s in rep.scales],
            "peaks": [float(v) for v in rep.peaks],
            "p3_constant": rep.p3_constant,
            "p4_constant": rep.p4_constant,
            "converged": rep.converged,
            "cstar": rep.cstar,
        },
    }
    if _signed(obj):
        out["nodal"] = {k: v for k, v in sorted(nodal_metrics(obj).items())}
    text = _dump_json(out)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_morse(args) -> int:
    obj = _load_solution(args.solution)
    if isinstance(obj, RadialSolution):
        sol = solve_radial(obj.p, k=obj.nodal_count, domain=obj.domain)
        rep = morse_index_radial(sol, j_max=args.jmax)
        out = {"p": obj.p, "kind": "radial", "total": rep.total,
               "counts": {str(j): c for j, c in sorted(rep.counts.items())},
               "clean": rep.is_clean}
    else:
        res = morse_index_planar(obj)
        out = {"p": obj.p, "kind": "planar", "total": res["count"],
               "method": res["method"]}
    text = _dump_json(out)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_limits(args) -> int:
    family = [_load_solution(p) for p in args.solutions]
    if len(family) < 2:
        raise ValueError("the limit table needs at least two solutions")
    family.sort(key=lambda s: s.p)
    rep = extract_concentration_points(family[-1], cstar=args.cstar)
    table = check_green_limit(family, rep)
    rows = [(p, r, m[0], el, er) for p, r, m, el, er in
            zip(table["p"], table["residual"], table["masses"],
                table["energy_lhs"], table["energy_rhs"])]
    text = _columns(rows, ("p", "green_residual", "mass", "p_dirichlet",
                           "eight_pi_mass_sq"))
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if not table["residual_decreasing"]:
        print("limit check failed: Green-limit residual is not decreasing",
              file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_profiles(args) -> int:
    r = np.geomspace(args.rmin, args.rmax, args.samples)
    pars = singular_params(args.ell)
    rows = np.column_stack([r, regular_bubble(r), singular_bubble(r, pars)])
    text = _two_column(rows)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps

def _entry_summary(obj, cfg: ExperimentConfig) -> dict:
    if isinstance(obj, RadialSolution):
        terms = energy_report(obj)
        summary = {"sup": obj.sup_norm, "pE": terms["pE"],
                   "p_dirichlet": terms["p_dirichlet"],
                   "nodes": obj.nodal_count}
    else:
        terms = obj.energy_terms()
        summary = {"sup": float(np.max(np.abs(obj.values))),
                   "pE": terms["pE"], "p_dirichlet": terms["p_dirichlet"],
                   "nodes": 1 if obj.sign_changing else 0}
    problems = []
    if "morse" in cfg.analyses:
        try:
            if isinstance(obj, RadialSolution):
                summary["morse"] = morse_index_radial(obj, j_max=cfg.jmax).total
            else:
                summary["morse"] = morse_index_planar(obj)["count"]
        except (ValueError, SolverError) as exc:
            problems.append(f"morse: {exc}")
    if "concentration" in cfg.analyses:
        try:
            rep = extract_concentration_points(obj, cstar=cfg.cstar)
            summary["conc_count"] = rep.count
            summary["conc_p3"] = rep.p3_constant
        except ValueError as exc:
            problems.append(f"concentration: {exc}")
    if "nodal" in cfg.analyses and _signed(obj):
        try:
            nm = nodal_metrics(obj)
            summary["nodal_reach"] = nm["zero_set_reach"]
            summary["nodal_shrink"] = nm["reach_over_min_scale"]
        except ValueError as exc:
            problems.append(f"nodal: {exc}")
    if problems:
        summary["analysis_error"] = "; ".join(problems)
    return summary


def _solve_entry(p: float, cfg: ExperimentConfig):
    if cfg.solver == "radial":
        return solve_radial(p, k=cfg.nodes, domain=cfg.domain_spec())
    return _solve_planar_entry(p, cfg.domain_spec(), cfg.nodes, cfg.symmetry,
                               cfg.init, cfg.tol, cfg.seed)


_CSV_HEADER = ("p", "sup", "pE", "p_dirichlet", "nodes", "morse",
               "conc_count", "nodal_reach", "nodal_shrink")


def _write_summary_csv(path: str, entries: dict, plist):
    rows = []
    for p in plist:
        e = entries[_pkey(p)]
        s = e.get("summary", {})
        rows.append((p,) + tuple(s.get(k) for k in _CSV_HEADER[1:]))
    _atomic_write(path, _columns(rows, _CSV_HEADER))


def _pkey(p: float) -> str:
    return _fmt(float(p))


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.out or cfg.out_dir
    man_path = os.path.join(out_dir, "manifest.json")
    chash = _config_hash(args.config)
    manifest = {"config_sha256": chash, "version": __version__, "entries": {}}
    if os.path.exists(man_path):
        with open(man_path) as fh:
            old = json.load(fh)
        if old.get("config_sha256") == chash:
            manifest["entries"] = old.get("entries", {})

    def fresh(p):
        ent = manifest["entries"].get(_pkey(p))
        if not ent or ent.get("status") != "ok":
            return True
        return not os.path.exists(os.path.join(out_dir, ent["file"]))

    todo = [p for p in cfg.p_list if fresh(p)]

    def work(p):
        try:
            obj = _solve_entry(p, cfg)
        except (SolverError, ValueError) as exc:
            return p, None, f"{type(exc).__name__}: {exc}"
        return p, obj, None

    results = {}
    workers = max(1, args.workers)
    if todo:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for p, obj, err in pool.map(work, todo):
                results[p] = (obj, err)

    for p in cfg.p_list:
        if p not in results:
            continue
        obj, err = results[p]
        key = _pkey(p)
        if err is not None:
            manifest["entries"][key] = {"status": "failed", "error": err,
                                        "file": None}
            print(f"p={key}: FAILED ({err})", file=sys.stderr)
            continue
        rel = os.path.join("solutions", f"p{key}.json")
        _atomic_write(os.path.join(out_dir, rel), _dump_json(obj.to_dict()))
        manifest["entries"][key] = {"status": "ok", "file": rel,
                                    "summary": _entry_summary(obj, cfg)}
        print(f"p={key}: ok sup={_fmt(manifest['entries'][key]['summary']['sup'])}")

    ok = [p for p in cfg.p_list
          if manifest["entries"].get(_pkey(p), {}).get("status") == "ok"]
    if "green" in cfg.analyses and len(ok) >= 2 and cfg.solver == "radial" \
            and cfg.nodes == 0 and cfg.domain == "disk":
        family = [_load_solution(os.path.join(
            out_dir, manifest["entries"][_pkey(p)]["file"])) for p in ok]
        try:
            rep = extract_concentration_points(family[-1], cstar=cfg.cstar)
            table = check_green_limit(family, rep)
        except ValueError as exc:
            manifest["green"] = {"error": str(exc)}
        else:
            rows = list(zip(table["p"], table["residual"],
                            [m[0] for m in table["masses"]]))
            _atomic_write(os.path.join(out_dir, "green_limit.csv"),
                          _columns(rows, ("p", "green_residual", "mass")))
            manifest["green"] = {"residual_decreasing": table["residual_decreasing"],
                                 "last_residual": table["residual"][-1]}

    _write_summary_csv(os.path.join(out_dir, "summary.csv"),
                       manifest["entries"], cfg.p_list)
    _atomic_write(man_path, _dump_json(manifest))
    if not ok:
        print("every sweep entry failed", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# ---------------------------------------------------------------------------
# report: plot-data emission

def cmd_report(args) -> int:
    cfg = parse_config(args.config)
    out_dir = args.out or cfg.out_dir
    man_path = os.path.join(out_dir, "manifest.json")
    if not os.path.exists(man_path):
        raise ValueError(f"no manifest at {man_path}; run the sweep first")
    with open(man_path) as fh:
        manifest = json.load(fh)
    entries = manifest.get("entries", {})
    ok = [(p, entries[_pkey(p)]) for p in cfg.p_list
          if entries.get(_pkey(p), {}).get("status") == "ok"]
    if not ok:
        raise ValueError("manifest holds no completed entries")
    for p, ent in ok:
        if not os.path.exists(os.path.join(out_dir, ent["file"])):
            raise ValueError(f"manifest lists a missing file: {ent['file']}")

    rep_dir = os.path.join(out_dir, "report")
    for name, key in (("trend_sup.txt", "sup"),
                      ("trend_energy.txt", "p_dirichlet"),
                      ("trend_morse.txt", "morse"),
                      ("trend_nodal.txt", "nodal_reach")):
        pairs = [(p, ent["summary"].get(key)) for p, ent in ok
                 if ent["summary"].get(key) is not None]
        if pairs:
            _atomic_write(os.path.join(rep_dir, name), _two_column(pairs))

    # overlay of the sharpest rescaled profile against the regular bubble
    p_last, ent = ok[-1]
    sol = _load_solution(os.path.join(out_dir, ent["file"]))
    prof = rescale(sol, truncate=True)
    if prof.values.ndim == 1:
        rows = np.column_stack([prof.offsets, prof.values,
                                regular_bubble(prof.offsets)])
    else:
        mid = prof.values.shape[1] // 2
        rows = np.column_stack([prof.offsets, prof.values[:, mid],
                                regular_bubble(prof.offsets)])
    good = np.isfinite(rows).all(axis=1)
    _atomic_write(os.path.join(rep_dir, "overlay_largest.txt"),
                  _two_column(rows[good]))

    status = EXIT_OK
    if cfg.nodes == 0:
        last = ok[-1][1]["summary"]["p_dirichlet"]
        if abs(last - EIGHT_PI_E) > cfg.energy_rtol * EIGHT_PI_E:
            print(f"energy trend check failed: final p-weighted Dirichlet "
                  f"energy {last:.4f} is not within {cfg.energy_rtol:.0%} "
                  f"of {EIGHT_PI_E:.4f}", file=sys.stderr)
            status = EXIT_CHECK
    print(f"report written to {rep_dir}")
    return status


# ---------------------------------------------------------------------------
# argument wiring

class _Parser(argparse.ArgumentParser):
    # the spec reserves exit code 2 for solver failures; argparse uses it
    # for bad usage, so route usage errors to 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="laneemden",
                 description="Lane-Emden solves, sweeps, and limit tables")
    sub = ap.add_subparsers(dest="command", required=True)

    sr = sub.add_parser("solve-radial", help="one radial profile to JSON")
    sr.add_argument("--p", type=float, required=True)
    sr.add_argument("--nodes", type=int, default=0,
                    help="interior zero count (0 = positive)")
    sr.add_argument("--domain", default="disk")
    sr.add_argument("--out")
    sr.set_defaults(fn=cmd_solve_radial)

    sp = sub.add_parser("solve-planar", help="one planar field to JSON")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--domain", default="disk")
    sp.add_argument("--sym", type=int, default=None)
    sp.add_argument("--init", choices=("tower", "eigen", "random"),
                    default=None, help="nodal init; omit for the positive branch")
    sp.add_argument("--nodes", type=int, default=None,
                    help="0 positive, 1 sign-changing (default: from --init)")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_solve_planar)

    an = sub.add_parser("analyze", help="energy, concentration, nodal metrics")
    an.add_argument("solution")
    an.add_argument("--cstar", type=float, default=64.0)
    an.add_argument("--out")
    an.set_defaults(fn=cmd_analyze)

    mo = sub.add_parser("morse", help="Morse index of a stored solution")
    mo.add_argument("solution")
    mo.add_argument("--jmax", type=int, default=12)
    mo.add_argument("--out")
    mo.set_defaults(fn=cmd_morse)

    li = sub.add_parser("limits", help="Green-limit table for a family")
    li.add_argument("solutions", nargs="+")
    li.add_argument("--cstar", type=float, default=64.0)
    li.add_argument("--out")
    li.set_defaults(fn=cmd_limits)

    pr = sub.add_parser("profiles", help="Liouville profile table")
    pr.add_argument("--ell", type=float, default=1.0)
    pr.add_argument("--rmin", type=float, default=1e-3)
    pr.add_argument("--rmax", type=float, default=50.0)
    pr.add_argument("--samples", type=int, default=513)
    pr.add_argument("--out")
    pr.set_defaults(fn=cmd_profiles)

    rn = sub.add_parser("run", help="execute a config-driven sweep")
    rn.add_argument("--config", required=True)
    rn.add_argument("--out", help="override the config's out_dir")
    rn.add_argument("--seed", type=int, default=None)
    rn.add_argument("--workers", type=int, default=2)
    rn.set_defaults(fn=cmd_run)

    rp = sub.add_parser("report", help="emit plot tables from a sweep")
    rp.add_argument("--config", required=True)
    rp.add_argument("--out", help="override the config's out_dir")
    rp.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
