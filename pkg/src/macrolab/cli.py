"""Command-line entry point: ``macrolab <subcommand> [options]``.

Exit codes: 0 when every check of the invoked suite passes, 1 when a check
fails (the failing names go to stderr), 2 for usage errors.  Reports are
JSON with ``schema: 1`` and sorted keys, so identical configurations give
byte-identical files apart from the ``timestamp`` field.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

SCHEMA = 1
COMMANDS = ("verify-adn", "check-moments", "solve-sym-poisson", "korn-constant",
            "simulate", "estimate-report")

# config key -> (type, default); flags of the same name override file values
CONFIG_KEYS = {
    "shape": (str, "ball"),
    "mesh": (str, None),
    "refine": (int, 1),
    "grid": (int, None),
    "eps": (float, 1.0),
    "s": (int, 0),
    "k": (int, 0),
    "seed": (int, 0),
    "preset": (str, "random_full"),
    "forcing": (str, "zero"),
    "steps": (int, 20),
    "cadence": (int, 1),
    "t_end": (float, None),
    "snapshots": (int, None),
    "cfl": (float, 0.5),
    "method": (str, "auto"),
    "tol": (float, None),
    "out": (str, None),
    "trace": (str, None),
}
POSITIVE = {"eps", "cfl", "tol", "t_end"}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are rejected."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def _coerce(key, value):
    if key not in CONFIG_KEYS:
        raise UsageError(f"unknown config key {key!r}")
    typ = CONFIG_KEYS[key][0]
    try:
        v = typ(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    if key in POSITIVE and not (v > 0 and math.isfinite(v)):
        raise UsageError(f"{key} must be positive")
    return v


def resolve_config(args) -> dict:
    cfg = {k: d for k, (_, d) in CONFIG_KEYS.items()}
    if args.config:
        for k, v in read_config(args.config).items():
            cfg[k] = _coerce(k, v)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = _coerce(k, v)
    return cfg


def _mesh(cfg):
    from .mesh import MeshError, default_shape_args, gen_mesh, parse_shape, read_mesh

    try:
        if cfg["mesh"]:
            return read_mesh(cfg["mesh"]), cfg["mesh"]
        shape = parse_shape(cfg["shape"])
        if isinstance(shape, str):
            shape = default_shape_args(shape) if shape in ("ball", "spheroid", "ellipsoid") else shape
        return gen_mesh(shape, cfg["refine"]), shape
    except (MeshError, KeyError) as exc:
        raise UsageError(f"bad mesh or shape: {exc}") from exc


def _shape_text(shape):
    from .mesh import shape_label

    return shape if isinstance(shape, str) else shape_label(shape)


# ------------------------------------------------------------------ subcommands

def cmd_verify_adn(cfg, args):
    from . import adnverify

    try:
        muts = [adnverify.parse_mutation(m) for m in (args.mutate or [])]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = adnverify.run_pipeline(muts or None)
    d = rep.to_dict()
    d["final_determinant_expanded"] = d["final_determinant"]
    d["final_determinant"] = d.pop("final_determinant_factored")
    d["mutations"] = [":".join(map(str, m)) for m in muts]
    ok = rep.passed and rep.final_matches_closed_form
    failing = rep.failing_steps or ([] if ok else ["final_determinant"])
    return d, ok, failing


def cmd_check_moments(cfg, args):
    from .kinetics import VelocityGrid, moment_suite

    grid = VelocityGrid(cfg["grid"] or 16)
    table = moment_suite(grid, tol=cfg["tol"] or 1e-12, seed=cfg["seed"])
    failing = [k for k, v in table.items() if not v["pass"]]
    return {"grid": grid.n, "table": table}, not failing, failing


def cmd_solve_sym_poisson(cfg, args):
    import numpy as np

    from . import ellipticfem as fe

    mesh, shape = _mesh(cfg)
    basis = fe.rigid_basis(mesh)
    h = fe.compatibility_project(fe.VectorFieldFE.from_function(mesh, fe.smooth_source), basis)
    u = fe.solve_sym_poisson(mesh, h, basis, tol=cfg["tol"] or 1e-10)
    ident = fe.energy_identity(u, h)
    res = fe.residual_report(u, h, basis)
    checks = {"energy_identity": ident["relative_gap"] <= 1e-8,
              "slip": res["slip_max"] <= 1e-10,
              "rigid_free": bool(all(abs(float(np.sum(fe.antisym_mean(u) * A))) <= 1e-8 * (1 + fe.h1_norm(u))
                                     for A in basis.matrices))}
    out = {"shape": _shape_text(shape), "refine": cfg["refine"], "vertices": mesh.nv, "tets": mesh.nt,
           "rigid_dim": basis.dim, "energy_identity": ident, "residuals": res,
           "h1_norm": fe.h1_norm(u), "checks": checks}
    return out, all(checks.values()), [k for k, v in checks.items() if not v]


def cmd_korn_constant(cfg, args):
    from . import ellipticfem as fe

    mesh, shape = _mesh(cfg)
    basis = fe.rigid_basis(mesh)
    K = fe.korn_constant(mesh, basis, method=cfg["method"], tol=cfg["tol"] or 1e-6)
    out = {"shape": _shape_text(shape), "refine": cfg["refine"], "rigid_dim": basis.dim,
           "korn_constant": K, "method": cfg["method"]}
    ok = K > 0 and math.isfinite(K)
    return out, ok, [] if ok else ["korn_constant"]


def _run(cfg):
    from . import estimatelab as el
    from .kinetics import VelocityGrid

    mesh, shape = _mesh(cfg)
    if cfg["preset"] not in el.PRESETS:
        raise UsageError(f"unknown preset {cfg['preset']!r}")
    if cfg["forcing"] not in el.FORCINGS:
        raise UsageError(f"unknown forcing {cfg['forcing']!r}")
    if cfg["steps"] < 0 or cfg["cadence"] < 1:
        raise UsageError("steps must be >= 0 and cadence >= 1")
    grid = VelocityGrid(cfg["grid"] or 8)
    run = el.simulate(mesh, grid, cfg["steps"], seed=cfg["seed"], preset=cfg["preset"],
                      forcing=cfg["forcing"], eps=cfg["eps"], s=cfg["s"], k=cfg["k"],
                      cadence=cfg["cadence"], cfl=cfg["cfl"], t_end=cfg["t_end"],
                      n_snapshots=cfg["snapshots"])
    return run, shape


def cmd_simulate(cfg, args):
    run, shape = _run(cfg)
    if cfg["trace"]:
        Path(cfg["trace"]).write_text(run.trace.to_csv())
    drifts = run.trace.drifts()
    tol = cfg["tol"] or 1e-12
    out = {"shape": _shape_text(shape), "run": run.config, "trace_columns": run.trace.columns(),
           "trace": run.trace.as_array().tolist(), "drift_per_step": drifts}
    ok = drifts["mass"] <= tol
    return out, ok, [] if ok else ["mass_drift"]


def cmd_estimate_report(cfg, args):
    from . import ensemble
    from . import estimatelab as el

    if cfg["t_end"] is None and cfg["snapshots"] is None and cfg["steps"] < 2 * cfg["cadence"]:
        raise UsageError("estimate-report needs at least three snapshots")
    run, shape = _run(cfg)
    if cfg["trace"]:
        Path(cfg["trace"]).write_text(run.trace.to_csv())
    l2 = el.evaluate_l2_estimate(run.snapshots, run.forcing)
    l6 = el.evaluate_l6_estimate(run.snapshots, run.forcing)
    g_ratio = max(abs(g.G) / g.f_norm2 for g in l2.g_samples if g.f_norm2 > 0) \
        if any(g.f_norm2 > 0 for g in l2.g_samples) else 0.0
    checks = {"l2_ratio_finite": math.isfinite(l2.ratio), "l6_ratio_finite": math.isfinite(l6.ratio)}
    out = {"shape": _shape_text(shape), "run": run.config, "L2": l2.to_dict(), "L6": l6.to_dict(),
           "G_over_f_norm2_max": g_ratio,
           "calibrated_caps": {"L2": ensemble.RATIO_CAP_L2, "L6": ensemble.RATIO_CAP_L6,
                               "G": ensemble.G_CONSTANT},
           "within_calibrated_caps": bool(l2.ratio <= ensemble.RATIO_CAP_L2
                                          and l6.ratio <= ensemble.RATIO_CAP_L6
                                          and g_ratio <= ensemble.G_CONSTANT),
           "checks": checks}
    return out, all(checks.values()), [k for k, v in checks.items() if not v]


HANDLERS = {
    "verify-adn": cmd_verify_adn,
    "check-moments": cmd_check_moments,
    "solve-sym-poisson": cmd_solve_sym_poisson,
    "korn-constant": cmd_korn_constant,
    "simulate": cmd_simulate,
    "estimate-report": cmd_estimate_report,
}


# ------------------------------------------------------------------ plumbing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--shape", help="ball | spheroid | ellipsoid | spheroid(a,c) | ellipsoid(a,b,c)")
    common.add_argument("--mesh", help="read a .msh3 mesh instead of generating one")
    common.add_argument("--refine", help="mesh refinement level")
    common.add_argument("--grid", help="velocity nodes per axis")
    common.add_argument("--eps", help="Knudsen-type scaling parameter")
    common.add_argument("--s", help="exponent of eps on the transport term")
    common.add_argument("--k", help="additional exponent of eps on the collision term")
    common.add_argument("--seed", help="random seed")
    common.add_argument("--preset", help="initial data preset")
    common.add_argument("--forcing", help="forcing preset")
    common.add_argument("--steps", help="number of time steps")
    common.add_argument("--cadence", help="steps between stored snapshots")
    common.add_argument("--t-end", dest="t_end", help="final time (overrides --steps)")
    common.add_argument("--snapshots", help="number of snapshot intervals")
    common.add_argument("--cfl", help="fraction of the CFL bound used for dt")
    common.add_argument("--method", help="eigen solver for korn-constant: auto | dense | lobpcg")
    common.add_argument("--tol", help="tolerance override for the invoked suite")
    common.add_argument("--trace", help="write the conservation trace as CSV here")
    p = argparse.ArgumentParser(prog="macrolab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify-adn":
            sp.add_argument("--mutate", action="append", metavar="NAME:I:J:K",
                            help="flip the sign of one term of a built or transcribed object")
    return p


def _threads():
    value = os.environ.get("MACROLAB_THREADS")
    if not value:
        return None
    try:
        n = int(value)
    except ValueError as exc:
        raise UsageError("MACROLAB_THREADS must be a positive integer") from exc
    if n < 1:
        raise UsageError("MACROLAB_THREADS must be a positive integer")
    return n


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = resolve_config(args)
        threads = _threads()
        if threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                result, ok, failing = HANDLERS[args.command](cfg, args)
        else:
            result, ok, failing = HANDLERS[args.command](cfg, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"macrolab: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # a suite that cannot complete counts as failed
        print(f"macrolab: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    report = {"schema": SCHEMA, "command": args.command, "pass": bool(ok), "failing": failing,
              "config": {k: v for k, v in sorted(cfg.items()) if k not in ("out", "trace")},
              "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
              "result": result}
    text = json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n"
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"macrolab: {args.command}: failing checks: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
