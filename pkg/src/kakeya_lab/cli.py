"""Command-line entry point: ``kakeya-lab <subcommand> [options]``.

Exit codes: 0 success (covered / certified / optimal), 2 a valid but
negative outcome (uncovered at resolution, heuristic not-found, budget
exhausted under --require-optimal, lift precondition failed), 1 bad input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import discrete_kakeya as dk
from . import euclid, homog, liegroups, topo_zero
from .configs import ConfigError, ConfigSpec, spec_from_dict
from .outputs import RunManifest, dumps, validate_result, write_csv, write_json

SUBCOMMANDS = ("zero", "cover", "lie-cover", "cylinder-id", "torus-wind", "counterexample", "membership",
               "elongation", "needle-area", "discrete-min", "discrete-verify", "ratio-table", "degree",
               "quotient-plot", "lift")

DEFAULT_RATIO_GROUPS = ["Z2", "Z3", "Z5", "Z7", "Z2xZ2", "Z3xZ3", "Z2^3", "Z4xZ2", "S3", "D4", "Q8", "D5", "A4"]


class InputError(ValueError):
    """Malformed command-line input."""


INPUT_ERRORS = (InputError, ConfigError, liegroups.GroupError, dk.GroupSpecError, homog.SphereMapError,
                json.JSONDecodeError, FileNotFoundError, KeyError, ValueError, TypeError)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def load_json_arg(value: str | None, what: str = "--spec") -> dict:
    if value is None:
        raise InputError(f"{what} is required")
    text = value.strip()
    if not text.startswith("{"):
        text = Path(value).read_text()
    data = json.loads(text)
    if not isinstance(data, dict):
        raise InputError(f"{what} must be a JSON object")
    return data


def parse_vector(value: str | None, what: str = "--target", dim: int | None = None) -> np.ndarray:
    if value is None:
        raise InputError(f"{what} is required")
    try:
        v = np.array([float(x) for x in value.replace(";", ",").split(",") if x.strip()])
    except ValueError:
        raise InputError(f"{what} must be comma-separated numbers, got {value!r}") from None
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InputError(f"{what} must be finite numbers")
    if dim is not None and v.size != dim:
        raise InputError(f"{what} needs {dim} coordinates, got {v.size}")
    return v


def _tol(args, default: float) -> float:
    if args.tol is None:
        return default
    if not args.tol > 0:
        raise InputError("--tol must be positive")
    return float(args.tol)


def _spec(args) -> tuple[ConfigSpec, dict]:
    payload = load_json_arg(args.spec)
    return spec_from_dict(payload), payload


def _group_config(args) -> tuple[liegroups.GroupConfig, dict]:
    payload = load_json_arg(args.spec)
    if args.group:
        payload = {**payload, "group": args.group}
    if "group" not in payload:
        if "kind" in payload:
            raise InputError("group configurations need a group tag (--group or a 'group' field)")
        raise InputError("--spec must hold {'group': ..., 'spec': {...}}")
    if "spec" not in payload:
        raise InputError("group configuration JSON needs a 'spec' field")
    return liegroups.group_config_from_dict(payload), payload


def _sphere_map(args) -> tuple[homog.SphereMap, dict]:
    if args.map:
        name, _, rest = args.map.partition(":")
        name = name.lower()
        if name == "identity":
            return homog.identity_map(), {"map": "identity"}
        if name == "antipodal":
            return homog.antipodal_map(), {"map": "antipodal"}
        if name == "constant":
            return homog.constant_map(parse_vector(rest, "--map constant", 3)), {"map": args.map}
        if name == "cap":
            v = parse_vector(rest, "--map cap")
            if v.size not in (3, 4):
                raise InputError("--map cap:x,y,z[,radius]")
            return homog.cap_map(v[:3], float(v[3]) if v.size == 4 else 0.5), {"map": args.map}
        raise InputError(f"unknown built-in map {name!r} (identity, antipodal, constant:x,y,z, cap:x,y,z[,r])")
    payload = load_json_arg(args.spec)
    return homog.SphereMap.from_dict(payload), payload


def _hash(payload: Any) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# run context
# ---------------------------------------------------------------------------

class Run:
    def __init__(self, args, argv):
        self.args = args
        self.manifest = RunManifest(args.command, seed=args.seed, argv=list(argv))
        self.plots: list[Callable[[RunManifest], None]] = []
        self.tables: list[tuple[list[dict], list[str] | None]] = []

    def plot(self, fn: Callable[..., Any]):
        if self.args.plot:
            self.plots.append(fn)

    def table(self, rows: list[dict], columns: list[str] | None = None):
        if self.args.csv:
            self.tables.append((rows, columns))


# ---------------------------------------------------------------------------
# subcommands; each returns (status, exit_code, result, input)
# ---------------------------------------------------------------------------

def cmd_zero(run: Run):
    spec, payload = _spec(run.args)
    tol = None if run.args.tol is None else _tol(run.args, 0.0)
    run.manifest.spec_hash = _hash(payload)
    cert = topo_zero.find_zero(spec, tol, **({"seed": run.args.seed} if spec.direction_dim > 3 else {}))
    if cert is None:
        result = {"status": "not-found", "note": "heuristic search found no zero; not a proof"}
        ok = False
    else:
        result = cert.to_dict()
        ok = cert.found
    run.manifest.tolerances["zero"] = result.get("tol", tol)
    if spec.direction_dim == 2 and spec.dim == 2:
        run.plot(lambda m: _plot_planar(run, spec, m, None, result))
    return ("found" if ok else "not-found"), (0 if ok else 2), result, {"spec": payload}


def _plotting():
    from . import plotting
    return plotting


def _plot_planar(run: Run, spec, manifest, target, cert):
    _plotting().plot_config_2d(spec, run.args.plot, manifest, target=target, certificate=cert)


def cmd_cover(run: Run):
    spec, payload = _spec(run.args)
    x = parse_vector(run.args.target, dim=spec.dim)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, topo_zero.TOL_2D if spec.direction_dim == 2 else topo_zero.TOL_S2)
    run.manifest.tolerances["cover"] = tol
    if spec.unoriented:
        cert = euclid.certify_cover_unoriented(spec, x, tol)
    else:
        cert = euclid.certify_cover_oriented(spec, x, tol)
    result = cert.to_dict()
    if spec.direction_dim == 2:
        run.plot(lambda m: _plot_planar(run, spec, m, x, result))
    return cert.status, (0 if cert.covered else 2), result, {"spec": payload, "target": x}


def cmd_lie_cover(run: Run):
    gc, payload = _group_config(run.args)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, 1e-9)
    run.manifest.tolerances["intrinsic"] = tol
    g = parse_vector(run.args.target) if run.args.target else None
    cert = liegroups.certify_cover_group(gc, g, tol)
    return cert.status, (0 if cert.covered else 2), cert.to_dict(), {"spec": payload, "target": g}


def cmd_cylinder_id(run: Run):
    gc, payload = _group_config(run.args)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, 1e-9)
    run.manifest.tolerances["intrinsic"] = tol
    target = parse_vector(run.args.target, dim=2) if run.args.target else None
    cert = liegroups.certify_identity_cylinder(gc, tol=tol, target=target)
    result = cert.to_dict()
    if cert.covered:
        def draw(m):
            cfg = gc if target is None else gc.translate(gc.group.inv(target))
            path = liegroups.CylinderPath(liegroups._cylinder_values(cfg), 1024)
            _plotting().plot_cylinder_lift(path.samples, run.args.plot, m, hit=cert.extra)
        run.plot(draw)
    return cert.status, (0 if cert.covered else 2), result, {"spec": payload, "target": target}


def cmd_torus_wind(run: Run):
    gc, payload = _group_config(run.args)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, 1e-9)
    run.manifest.tolerances["intrinsic"] = tol
    report = liegroups.torus_winding(gc)
    cert = liegroups.certify_identity_torus(gc, tol)
    result = {**report.to_dict(), "certificate": cert.to_dict()}
    return cert.status, (0 if cert.covered else 2), result, {"spec": payload}


def cmd_counterexample(run: Run):
    C = float(run.args.radius) if run.args.radius is not None else 1.0
    spec = euclid.tangent_circle_config(C, run.args.orientation)
    tol = _tol(run.args, topo_zero.TOL_2D)
    run.manifest.tolerances["membership"] = tol
    payload = spec.to_dict()
    run.manifest.spec_hash = _hash(payload)
    inf = euclid.line_distance_infimum(spec)
    result: dict = {"radius": C, "infimum_distance": inf.residual, "infimum_angle": inf.angle}
    x = None
    ok = True
    if run.args.target:
        x = parse_vector(run.args.target, dim=2)
        mem = euclid.membership_test_2d(spec, x, tol=tol)
        result["membership"] = mem.to_dict()
        ok = mem.covered
    run.plot(lambda m: _plot_planar(run, spec, m, x, None))
    status = "covered" if ok and x is not None else ("uncovered" if x is not None else "ok")
    return status, (0 if ok else 2), result, {"radius": C, "target": x}


def cmd_membership(run: Run):
    payload = load_json_arg(run.args.spec)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, topo_zero.TOL_2D)
    run.manifest.tolerances["membership"] = tol
    if payload.get("target") == "sphere":
        smap = homog.SphereMap.from_dict(payload)
        y = parse_vector(run.args.target, dim=3)
        depth = run.args.depth or 4
        res = homog.swept_membership_s2(smap, y, tol, depth)
        return res.status, (0 if res.covered else 2), res.to_dict(), {"spec": payload, "target": y}
    spec = spec_from_dict(payload)
    x = parse_vector(run.args.target, dim=2)
    R = float(run.args.R) if run.args.R is not None else math.inf
    res = euclid.membership_test_2d(spec, x, R, tol)
    run.plot(lambda m: _plot_planar(run, spec, m, x, None))
    status = "covered" if res.covered else "uncovered-at-resolution"
    return status, (0 if res.covered else 2), res.to_dict(), {"spec": payload, "target": x, "R": R}


def cmd_elongation(run: Run):
    spec, payload = _spec(run.args)
    run.manifest.spec_hash = _hash(payload)
    tol = _tol(run.args, topo_zero.TOL_2D)
    run.manifest.tolerances["membership"] = tol
    x = parse_vector(run.args.target, dim=2)
    rep = euclid.elongation_required(spec, x, tol)
    return "ok", 0, rep.to_dict(), {"spec": payload, "target": x}


def cmd_needle_area(run: Run):
    spec, payload = _spec(run.args)
    run.manifest.spec_hash = _hash(payload)
    R = float(run.args.R) if run.args.R is not None else 1.0
    samples = int(run.args.samples or euclid.DEFAULT_SAMPLES)
    box = tuple(parse_vector(run.args.box, "--box", 4)) if run.args.box else None
    if box is None and not math.isfinite(R):
        raise InputError("R = inf needs an explicit --box")
    rep = euclid.needle_area_2d(spec, R, samples, run.args.seed, box)
    row = euclid.area_csv_row(spec, rep)
    run.table([row], list(row))
    run.plot(lambda m: _plotting().plot_needle_set(
        spec, R, run.args.plot, m, box=rep.box, estimate=rep.estimate, ci=rep.ci_halfwidth))
    return "ok", 0, rep.to_dict(), {"spec": payload, "R": R, "samples": samples, "box": box}


def cmd_discrete_min(run: Run):
    G = dk.build_group(_group_arg(run.args))
    budget = run.args.budget_ms if run.args.budget_ms is not None else dk.DEFAULT_BUDGET_MS
    if budget <= 0:
        raise InputError("--budget-ms must be positive")
    run.manifest.spec_hash = _hash(G.name)
    rep = dk.min_kakeya_exact(G, budget)
    result = rep.to_dict(G)
    # timing lives in the manifest so that results are reproducible byte for byte
    result.pop("elapsed_s", None)
    run.table([{"group": G.name, "order": G.order, "min_size": rep.size, "c": result["c"],
                "optimal": rep.optimal}])
    run.plot(lambda m: _plotting().plot_cover_heatmap(
        G.table, rep.cover.elements, G.labels, run.args.plot, m, f"{G.name}: |E| = {rep.size}, c = {result['c']}"))
    ok = rep.optimal or not run.args.require_optimal
    status = "optimal" if rep.optimal else "budget-exhausted"
    return status, (0 if ok else 2), result, {"group": G.name, "budget_ms": budget}


def _group_arg(args) -> Any:
    if args.group:
        return args.group
    if args.spec:
        return load_json_arg(args.spec)
    raise InputError("--group is required")


def cmd_discrete_verify(run: Run):
    G = dk.build_group(_group_arg(run.args))
    if run.args.elements:
        elements = [int(x) for x in run.args.elements.replace(";", ",").split(",") if x.strip()]
    elif run.args.spec and run.args.group:
        elements = load_json_arg(run.args.spec)["elements"]
    else:
        raise InputError("--elements (comma-separated indices) is required")
    if any(not 0 <= e < G.order for e in elements):
        raise InputError(f"element indices must lie in [0, {G.order})")
    run.manifest.spec_hash = _hash([G.name, sorted(elements)])
    res = dk.verify_kakeya(G, elements)
    run.plot(lambda m: _plotting().plot_cover_heatmap(
        G.table, sorted(set(elements)), G.labels, run.args.plot, m, f"{G.name}: verify |E| = {len(set(elements))}"))
    return ("kakeya" if res.ok else "not-kakeya"), (0 if res.ok else 2), res.to_dict(), \
        {"group": G.name, "elements": sorted(set(elements))}


def cmd_ratio_table(run: Run):
    groups = [g for g in (run.args.group or "").replace(";", ",").split(",") if g.strip()] or DEFAULT_RATIO_GROUPS
    budget = run.args.budget_ms if run.args.budget_ms is not None else dk.DEFAULT_BUDGET_MS
    if budget <= 0:
        raise InputError("--budget-ms must be positive")
    rows = dk.ratio_table(groups, budget)
    run.manifest.spec_hash = _hash(groups)
    run.table(rows, dk.RATIO_COLUMNS)
    all_opt = all(r["optimal"] for r in rows)
    ok = all_opt or not run.args.require_optimal
    return ("optimal" if all_opt else "budget-exhausted"), (0 if ok else 2), {"rows": rows}, \
        {"groups": groups, "budget_ms": budget}


def cmd_degree(run: Run):
    smap, payload = _sphere_map(run.args)
    run.manifest.spec_hash = _hash(payload)
    rep = homog.liftability_s2(smap, run.args.depth)
    ok = rep.liftable is not None
    return rep.decision, (0 if ok else 2), rep.to_dict(), {"map": payload, "depth": run.args.depth}


def cmd_quotient_plot(run: Run):
    axes = [parse_vector(a, "--axis", 3) for a in (run.args.axis or ["0,0,1"])]
    bases = [parse_vector(b, "--base", 3) for b in (run.args.base or ["1,0,0"])]
    if len(axes) != len(bases):
        if len(axes) == 1:
            axes = axes * len(bases)
        elif len(bases) == 1:
            bases = bases * len(axes)
        else:
            raise InputError("give one --axis per --base (or a single one of either)")
    curves = [homog.quotient_curve(a / np.linalg.norm(a), b / np.linalg.norm(b)) for a, b in zip(axes, bases)]
    count = int(run.args.samples or 256)
    samples = [c.samples(count) for c in curves]
    t = np.linspace(0.0, 2.0 * math.pi, count)
    rows = [{"curve": i, "t": float(tt), "x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
            for i, pts in enumerate(samples) for tt, p in zip(t, pts)]
    run.table(rows, ["curve", "t", "x", "y", "z"])
    run.manifest.spec_hash = _hash([[a.tolist(), b.tolist()] for a, b in zip(axes, bases)])
    run.plot(lambda m: _plotting().plot_sphere_curves(
        samples, run.args.plot, m))
    return "ok", 0, {"curves": [c.to_dict() for c in curves]}, {"axes": axes, "bases": bases}


def cmd_lift(run: Run):
    smap, payload = _sphere_map(run.args)
    run.manifest.spec_hash = _hash(payload)
    q = parse_vector(run.args.omit, "--omit", 3)
    depth = run.args.depth or 5
    run.manifest.tolerances["projection"] = homog.LIFT_TOL
    try:
        lift = homog.lift_omitting_point(smap, q, depth)
    except homog.LiftError as exc:
        return "precondition-failed", 2, {"error": str(exc)}, {"map": payload, "omit": q}
    deg = topo_zero.map_degree_s2(lambda x: lift.project(x), min(depth, 6))
    result = {**lift.to_dict(), "projected_degree": deg.degree, "projected_degree_status": deg.status}
    return "lifted", 0, result, {"map": payload, "omit": q, "depth": depth}


HANDLERS = {
    "zero": cmd_zero, "cover": cmd_cover, "lie-cover": cmd_lie_cover, "cylinder-id": cmd_cylinder_id,
    "torus-wind": cmd_torus_wind, "counterexample": cmd_counterexample, "membership": cmd_membership,
    "elongation": cmd_elongation, "needle-area": cmd_needle_area, "discrete-min": cmd_discrete_min,
    "discrete-verify": cmd_discrete_verify, "ratio-table": cmd_ratio_table, "degree": cmd_degree,
    "quotient-plot": cmd_quotient_plot, "lift": cmd_lift,
}


# ---------------------------------------------------------------------------
# parser and driver
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="configuration JSON (file path or inline object)")
    common.add_argument("--group", help="Lie group tag or finite group spec (e.g. Z3xZ3, D4, UT3(2))")
    common.add_argument("--target", help="target point, comma separated")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--samples", type=int, help="Monte Carlo samples / curve samples")
    common.add_argument("--budget-ms", dest="budget_ms", type=float, help="time budget for exact search")
    common.add_argument("--out", help="write the JSON result here (default: stdout)")
    common.add_argument("--csv", help="write a CSV table here")
    common.add_argument("--plot", help="write an SVG figure here")
    common.add_argument("--require-optimal", dest="require_optimal", action="store_true",
                        help="exit 2 unless the exact search closed")
    common.add_argument("--R", type=float, help="elongation length (needle-area, membership)")
    common.add_argument("--box", help="sampling box x0,x1,y0,y1 for needle-area")
    common.add_argument("--depth", type=int, help="icosphere depth (degree, lift, membership on S^2)")
    common.add_argument("--elements", help="element indices for discrete-verify")
    common.add_argument("--map", help="built-in sphere map: identity, antipodal, constant:x,y,z, cap:x,y,z[,r]")
    common.add_argument("--axis", action="append", help="rotation axis for quotient-plot (repeatable)")
    common.add_argument("--base", action="append", help="base point for quotient-plot (repeatable)")
    common.add_argument("--omit", help="point omitted by the map (lift)")
    common.add_argument("--radius", type=float, help="tangent-circle radius C (counterexample)")
    common.add_argument("--orientation", type=int, default=1, choices=(1, -1))

    parser = argparse.ArgumentParser(prog="kakeya-lab", description="Kakeya line configuration toolkit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    helps = {
        "zero": "zero of the perpendicular section", "cover": "certify a target point in R^n",
        "lie-cover": "certify a target in a Lie group", "cylinder-id": "identity coverage in C^*",
        "torus-wind": "winding numbers and identity coverage on T^2",
        "counterexample": "tangent-circle configuration in R^2",
        "membership": "membership in |sigma| (planar or on S^2)", "elongation": "least R covering a target",
        "needle-area": "Monte Carlo area of the R-needle set", "discrete-min": "minimal discrete Kakeya set",
        "discrete-verify": "check a discrete Kakeya set", "ratio-table": "table of c = |E|/|G|",
        "degree": "degree and liftability of a sphere map", "quotient-plot": "curves on S^2 from SO(3)",
        "lift": "explicit SO(3) lift of a map omitting a point",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    ctx = Run(args, argv)
    try:
        status, code, result, inputs = HANDLERS[args.command](ctx)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = ctx.manifest
    for key, path in (("json", args.out), ("csv", args.csv), ("svg", args.plot)):
        if path:
            manifest.outputs[key] = str(path)
    if args.csv and not ctx.tables:
        manifest.outputs.pop("csv")
    if args.plot and not ctx.plots:
        manifest.outputs.pop("svg")
    manifest.finish()
    try:
        for rows, columns in ctx.tables:
            write_csv(args.csv, rows, columns, manifest)
        for draw in ctx.plots:
            draw(manifest)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    envelope = {"subcommand": args.command, "status": status, "exit_code": code, "result": result,
                "input": inputs, "manifest": manifest.to_dict()}
    envelope = json.loads(dumps(envelope))
    validate_result(envelope)
    if args.out:
        write_json(args.out, envelope)
        print(f"{args.command}: {status} -> {args.out}")
    else:
        sys.stdout.write(dumps(envelope))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
