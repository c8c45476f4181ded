"""Command-line surface: generators, topology queries, Hodge reports,
end/warped experiments and the scenario runner.

Exit status of ``scenario run``: 0 when every check passes, 1 when the
report was written with failures, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import __version__
from .complexes import betti, detect_boundary_cycles, gen_annulus, gen_closed_surface
from .errors import ConfigError, HodgeLabError
from .hodge import basis_report, basis_to_csv, harmonic_basis
from .mesh_files import read_mesh, read_metric, write_mesh, write_metric
from .metric import mass_matrices, metric_from_embedding, metric_uniform
from .scenarios import load_config, run_scenario
from . import ends as ends_mod
from . import warped as warped_mod


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def _load_bundle(mesh_path, metric_path=None):
    cx = read_mesh(mesh_path)
    if metric_path:
        metric = read_metric(metric_path, cx)
    elif cx.coords is not None:
        metric = metric_from_embedding(cx, cx.coords)
    else:
        metric = metric_uniform(cx)
    return cx, metric, mass_matrices(cx, metric)


def _cmd_gen(args) -> int:
    if args.shape == "annulus":
        cx = gen_annulus(args.n_radial, args.n_angular, args.r_inner, args.r_outer,
                         grading=args.grading)
    else:
        genus = {"sphere": 0, "torus": 1, "genus2": 2}[args.shape]
        cx = gen_closed_surface(genus, args.refinement)
    write_mesh(args.out, cx)
    if args.metric_out:
        metric = (metric_from_embedding(cx, cx.coords)
                  if cx.coords is not None else metric_uniform(cx))
        write_metric(args.metric_out, cx, metric)
    _emit({"vertices": cx.n_vertices, "edges": cx.n_edges,
           "triangles": cx.n_triangles, "out": str(args.out)})
    return 0


def _cmd_betti(args) -> int:
    cx = read_mesh(args.mesh)
    rep = betti(cx, relative=args.relative, seed=args.seed)
    _emit({"b": list(rep.b), "relative": rep.relative,
           "prime_used": list(rep.prime_used),
           "boundary_loops": len(detect_boundary_cycles(cx))
           if cx.boundary_edge.any() else 0})
    return 0


def _cmd_hodge(args) -> int:
    _, _, bundle = _load_bundle(args.mesh, args.metric)
    basis = harmonic_basis(bundle, args.degree, args.bc,
                           tol_policy="flag", seed=args.seed)
    _emit(basis_report(basis))
    if args.csv:
        basis_to_csv(basis, args.csv)
    return 0 if basis.matches_betti and not basis.ambiguous else 1


def _cmd_ends(args) -> int:
    from .scenarios import _END_MODELS

    if args.model not in _END_MODELS:
        raise ConfigError(f"unknown end model {args.model!r}")
    weight, exact_fn, _ = _END_MODELS[args.model]
    radii = [float(x) for x in args.radii.split(",")]
    model = ends_mod.radial_end_model(weight, 1.0, radii[-1], include=radii)
    curve = ends_mod.capacity_model(model, radii)
    classification, trend = ends_mod.classify_parabolic(radii, curve)
    _emit({"end_id": 0, "radii": radii, "capacities": [float(c) for c in curve],
           "classification": classification, "trend_exponent": trend})
    return 0


def _cmd_warped(args) -> int:
    if args.check == "lambda0":
        prob = warped_mod.mode_problem(args.n, 0, args.L, args.dr, [0.0])
        _emit({"check": "lambda0", "n": args.n, "L": args.L,
               "lambda0": warped_mod.mode_lambda0(prob, seed=args.seed)})
        return 0
    modes = [float(x) for x in args.modes.split(",")]
    if args.check == "hardy":
        grid = np.linspace(0.0, args.L, int(args.L / args.dr) + 1)
        rep = warped_mod.hardy_check(args.n, args.k, grid, args.samples, args.seed)
    else:
        prob = warped_mod.mode_problem(args.n, args.k, args.L, args.dr, modes)
        if args.check == "gap":
            rep = warped_mod.mode_gap_check(prob, args.samples, args.seed)
        elif args.check == "dx":
            rep = warped_mod.donnelly_xavier_check(prob, args.samples, args.seed)
        else:
            raise ConfigError(f"unknown warped check {args.check!r}")
    _emit(rep.as_dict())
    return 0 if rep.violations == 0 else 1


def _cmd_scenario(args) -> int:
    cfg = load_config(args.config)
    formats = tuple(x.strip() for x in args.format.split(",") if x.strip())
    stamp = "" if args.no_timestamp else datetime.datetime.now(
        datetime.timezone.utc
    ).isoformat()
    result = run_scenario(
        cfg, args.out, formats=formats, seed_override=args.seed, timestamp=stamp
    )
    for check in result["checks"]:
        status = "PASS" if check["pass"] else "FAIL"
        print(f"[{status}] {result['name']}: {check['name']} "
              f"expected={check['expected']} actual={check['actual']}")
    return 0 if result["all_pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hodgelab", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a mesh")
    g.add_argument("shape", choices=["sphere", "torus", "genus2", "annulus"])
    g.add_argument("--refinement", type=int, default=3)
    g.add_argument("--n-radial", type=int, default=6)
    g.add_argument("--n-angular", type=int, default=16)
    g.add_argument("--r-inner", type=float, default=0.5)
    g.add_argument("--r-outer", type=float, default=2.0)
    g.add_argument("--grading", choices=["linear", "log"], default="linear")
    g.add_argument("--out", required=True)
    g.add_argument("--metric-out")
    g.set_defaults(func=_cmd_gen)

    b = sub.add_parser("betti", help="GF(p) Betti numbers of a mesh file")
    b.add_argument("mesh")
    b.add_argument("--relative", action="store_true")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_cmd_betti)

    h = sub.add_parser("hodge", help="harmonic basis report for a mesh file")
    h.add_argument("mesh")
    h.add_argument("--metric")
    h.add_argument("--degree", type=int, default=1)
    h.add_argument("--bc", choices=["none", "absolute", "relative"], default="none")
    h.add_argument("--csv")
    h.add_argument("--seed", type=int, default=0)
    h.set_defaults(func=_cmd_hodge)

    e = sub.add_parser("ends", help="capacity curve of a model end")
    e.add_argument("--model", default="flat2d")
    e.add_argument("--radii", default="8,16,32,64,128")
    e.set_defaults(func=_cmd_ends)

    w = sub.add_parser("warped", help="mode-reduced warped-collar checks")
    w.add_argument("--check", choices=["gap", "hardy", "dx", "lambda0"],
                   required=True)
    w.add_argument("--n", type=int, default=5)
    w.add_argument("--k", type=int, default=1)
    w.add_argument("--L", type=float, default=12.0)
    w.add_argument("--dr", type=float, default=0.02)
    w.add_argument("--modes", default="0,1,4")
    w.add_argument("--samples", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.set_defaults(func=_cmd_warped)

    s = sub.add_parser("scenario", help="scenario runner")
    ss = s.add_subparsers(dest="scenario_command", required=True)
    r = ss.add_parser("run", help="run one scenario config")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="reports")
    r.add_argument("--format", default="json,csv,png")
    r.add_argument("--no-timestamp", action="store_true")
    r.set_defaults(func=_cmd_scenario)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HodgeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
