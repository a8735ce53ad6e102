"""Command line entry point: icosa {verify,group,search,dynamics,render,resolvent}."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    tol: float = 1e-9
    digits: int = 50
    threads: int = 1
    out: str | None = None
    json: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError("--digits must be at least 15")
        if self.threads < 1:
            raise ValueError("--threads must be positive")


class UsageError(Exception):
    pass


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    return obj


def emit(report: dict, cfg: RunConfig) -> None:
    """Write the report as JSON to --json (or stdout).  Only the timestamp varies."""
    report = dict(report)
    report["config"] = asdict(cfg)
    report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(_to_jsonable(report), indent=2, sort_keys=True)
    if cfg.json:
        Path(cfg.json).write_text(text + "\n")
    else:
        print(text)


def _complex_arg(text: str) -> complex:
    try:
        re_, im_ = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected re,im but got {text!r}")
    return complex(re_, im_)


def _point(z: complex) -> np.ndarray:
    return np.array([z, 1], dtype=np.complex128)


# -- subcommands ---------------------------------------------------------------------

def cmd_verify(args, cfg: RunConfig):
    from .equivariants import (basic_equivariants, check_table1, equivariance_defect,
                               table1_passes, verify_module_relation)
    from .forms import verify_syzygy
    from .group import random_sphere_points

    pts = random_sphere_points(50, np.random.default_rng(cfg.seed))
    defects = {m.name: equivariance_defect(m, pts) for m in basic_equivariants()}
    table = check_table1(cfg.tol)
    checks = {
        "syzygy": bool(verify_syzygy()),
        "module_relation": bool(verify_module_relation()),
        "equivariance": all(d < cfg.tol for d in defects.values()),
        "table1": table1_passes(table),
    }
    report = {"checks": checks, "equivariance_defects": defects,
              "table1": {m: {k: v[0] for k, v in row.items()} for m, row in table.items()}}
    return report, all(checks.values())


def cmd_group(args, cfg: RunConfig):
    from .group import icosahedral_group, special_orbits

    G = icosahedral_group()
    orbits = special_orbits()
    report = {"order": len(G), "order_census": G.order_census(),
              "mirrors": len(G.mirrors),
              "orbit_sizes": {o.label: o.size for o in orbits}}
    if args.export:
        data = {o.label: o.to_json() for o in orbits}
        data["seed"] = cfg.seed
        Path(args.export).write_text(json.dumps(_to_jsonable(data), indent=2, sort_keys=True))
        report["export"] = args.export
    return report, True


def cmd_search(args, cfg: RunConfig):
    from .search import (classify_polyhedron, cycle_defects, fit_oracle_scalar,
                         real_restriction_roots, special_maps)

    census = real_restriction_roots(dps=cfg.digits)
    scalar, spread = fit_oracle_scalar(seed=cfg.seed)
    maps = []
    for sol in special_maps():
        maps.append({"name": sol.map.name, "A": 1.0, "B": sol.B,
                     "polyhedron": classify_polyhedron(sol.orbit),
                     "orbit_size": sol.orbit.size, "slice": [float(v) for v in sol.slice],
                     "cycle_defects": cycle_defects(sol)})
    report = {"census": census.summary(), "oracle_scalar": scalar,
              "oracle_spread": spread, "maps": maps}
    ok = census.count("new") == 8 and len(maps) == 2
    if args.newton_png:
        from .render import render_newton
        from .search import newton_basins
        res = newton_basins(args.res, threads=cfg.threads)
        raster = render_newton(res, width=args.res, seed=cfg.seed)
        raster.save(args.newton_png)
        report["newton"] = {"rows": args.res, "cells": int(res.centers.size),
                            "converged_fraction": res.converged_fraction,
                            "classes": res.class_counts(), "image": args.newton_png}
    return report, ok


def _cycles_for(name: str):
    """(map, CycleSet) for g, h, phi or eta."""
    from .dynamics import CycleSet
    from .equivariants import eta, phi
    from .group import special_orbits
    from .search import special_maps

    g, h = special_maps()
    V, Fc, _ = special_orbits()
    table = {"g": (g.map, g.orbit.points), "h": (h.map, h.orbit.points),
             "phi": (phi(), Fc.points), "eta": (eta(), V.points)}
    if name not in table:
        raise UsageError(f"unknown map {name!r}")
    m, pts = table[name]
    return m, CycleSet.antipodal(pts)


def cmd_dynamics(args, cfg: RunConfig):
    from .dynamics import converge_to_cycle, find_edge_anchor, orbit_trace
    from .search import special_maps

    report = {}
    if args.edge_anchor:
        g = special_maps()[0]
        a = find_edge_anchor(g.map, g.orbit.points)
        report["edge_anchor"] = {"Z": a.value, "multiplier": a.multiplier,
                                 "repelling": abs(a.multiplier) > 1, "image": a.image,
                                 "residual": a.residual}
    if args.seed_point is not None or args.trace:
        z0 = _complex_arg(args.seed_point) if args.seed_point else complex(
            *np.random.default_rng(cfg.seed).normal(size=2))
        m, cycles = _cycles_for(args.map)
        r = converge_to_cycle(m, _point(z0), cycles, args.max_iter)
        report["trajectory"] = {"map": args.map, "start": z0, "status": r.status,
                                "iterations": r.iterations, "cycle": r.cycle}
        if args.trace:
            P = orbit_trace(m, _point(z0), r.iterations)
            with np.errstate(divide="ignore", invalid="ignore"):
                z = P[:, 0] / P[:, 1]
            Path(args.trace).write_text(json.dumps(_to_jsonable(
                {"map": args.map, "seed": cfg.seed, "points": [
                    [v.real, v.imag] if np.isfinite(v) else None for v in z]}), indent=2))
            report["trajectory"]["trace"] = args.trace
    if not report:
        raise UsageError("dynamics needs --edge-anchor, --seed-point or --trace")
    return report, True


def cmd_render(args, cfg: RunConfig):
    from .render import Viewport, basin_stats, render_basins, render_julia

    m, cycles = _cycles_for(args.map)
    vp = Viewport.parse(args.viewport) if args.viewport else Viewport()
    if args.kind == "basins":
        r = render_basins(m, cycles, args.res, args.res, vp, args.max_iter, cfg.threads,
                          seed=cfg.seed)
        stats = basin_stats(r, len(cycles))
    else:
        r = render_julia(m, cycles, args.res, args.res, vp, args.max_iter,
                         threads=cfg.threads, seed=cfg.seed)
        stats = {"marked_fraction": float(r.marked.mean()), **basin_stats(r, len(cycles))}
    out = args.out or cfg.out or f"{args.map}_{args.kind}.ppm"
    path = r.save(out)
    return {"image": str(path), "map": args.map, "kind": args.kind, "res": args.res,
            "viewport": list(vp.as_tuple()), "stats": stats}, True


def cmd_resolvent(args, cfg: RunConfig):
    from .group import random_sphere_points
    from .resolvent import (fit_resolvent, resolvent_at, symmetry_breaking_demo,
                            tetrahedral_system)
    from .search import special_maps

    ts = tetrahedral_system(args.flip)
    report = {}
    fit = fit_resolvent(ts=ts)
    if args.z is not None:
        d = resolvent_at(_complex_arg(args.z), ts)
        report["resolvent"] = {"z": d.z, "coefficients": [complex(c) for c in d.coefficients],
                               "Z": d.parameter, "b": fit.b, "c": fit.c,
                               "a3_over_F": d.ratio3, "a5_over_H": d.ratio5}
    report["fit"] = {"b": fit.b, "c": fit.c, "spread_b": fit.spread_b,
                     "spread_c": fit.spread_c, "vanishing": fit.vanishing,
                     "passes": fit.passes}
    if args.demo:
        g = special_maps()[0]
        seeds = random_sphere_points(args.seeds, np.random.default_rng(cfg.seed))
        report["demo"] = symmetry_breaking_demo(g, seeds, ts).as_dict()
    ok = all(fit.passes.values())
    if args.demo:
        ok = ok and report["demo"]["same_label_fraction"] == 1.0
    return report, ok


# -- argument parsing -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--digits", type=int, default=50, help="working precision (>= 15)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $ICOSA_THREADS or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="output file or directory for images")
    common.add_argument("--json", default=None, help="write the JSON report here")

    p = argparse.ArgumentParser(prog="icosa", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="exact identities and symmetry checks")
    s = sub.add_parser("group", parents=[common], help="the group and its special orbits")
    s.add_argument("--export", default=None, help="write the special orbits as JSON")
    s = sub.add_parser("search", parents=[common], help="find the special degree-31 maps")
    s.add_argument("--newton-png", default=None, help="render Newton basins to this file")
    s.add_argument("--res", type=int, default=300, help="Newton triangle rows / image width")
    s = sub.add_parser("dynamics", parents=[common], help="iterate g or h")
    s.add_argument("--map", default="g", choices=["g", "h", "phi", "eta"])
    s.add_argument("--seed-point", default=None, metavar="RE,IM", help="starting point")
    s.add_argument("--trace", default=None, help="write the trajectory as JSON")
    s.add_argument("--edge-anchor", action="store_true", help="report Z and its multiplier")
    s.add_argument("--max-iter", type=int, default=400)
    s = sub.add_parser("render", parents=[common], help="basin or Julia images")
    s.add_argument("--map", default="g", choices=["g", "h", "phi", "eta"])
    s.add_argument("--kind", default="basins", choices=["basins", "julia"])
    s.add_argument("--res", type=int, default=500)
    s.add_argument("--viewport", default=None, metavar="X0,Y0,X1,Y1")
    s.add_argument("--max-iter", type=int, default=400)
    s = sub.add_parser("resolvent", parents=[common], help="quintic resolvent and tau labels")
    s.add_argument("--z", default=None, metavar="RE,IM")
    s.add_argument("--demo", action="store_true", help="run the symmetry-breaking demo")
    s.add_argument("--seeds", type=int, default=1000)
    s.add_argument("--flip", action="store_true", help="use the other chiral tetrahedra")
    return p


COMMANDS = {"verify": cmd_verify, "group": cmd_group, "search": cmd_search,
            "dynamics": cmd_dynamics, "render": cmd_render, "resolvent": cmd_resolvent}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    # `--seed re,im` on dynamics means a start point; keep --seed an integer elsewhere
    if argv[:1] == ["dynamics"] and "--seed" in argv:
        i = argv.index("--seed")
        if i + 1 < len(argv) and "," in argv[i + 1]:
            argv[i] = "--seed-point"
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    threads = args.threads or int(os.environ.get("ICOSA_THREADS", "1") or 1)
    try:
        cfg = RunConfig(args.tol, args.digits, threads, args.out, args.json, args.seed)
        report, ok = COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError) as e:
        print(f"icosa: {e}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    report = {"command": args.command, "ok": ok, **report}
    emit(report, cfg)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
