"""Command-line entry point: ``fmnc <subcommand> ...``.

Exit codes: 0 all asserted checks pass, 1 an assertion failed (first witness
printed to stderr), 2 malformed input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import convexity as cx
from . import metric as mt
from . import mnc
from .fixedpoint import OperatorSpec, darbo_solve, sadovskii_check
from .report import Check, build_report, emit_report
from .space import PointCloud, SpaceModel, load_json, make_space, shipped_spaces
from .suites import SUITES, RunConfig, run_checks


class InputError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS)
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    p.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                   help="combinatorial budget for hull grids (overrides FMNC_BUDGET)")
    return p


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="fmnc", parents=[common],
                                 description="Frechet-space metrics, Hausdorff MNC bounds and Darbo iteration.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", parents=[common], help="validate or list space descriptors")
    sp.add_argument("--space", help="descriptor JSON to validate")
    sp.add_argument("--kind", choices=("c-grid", "seq-product", "lp-grid"))
    sp.add_argument("--dim", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--params", default="{}", help="JSON object of kind-specific params")
    sp.add_argument("--list", action="store_true", help="print the shipped models")

    me = sub.add_parser("metric", parents=[common], help="evaluate or audit a metric")
    msub = me.add_subparsers(dest="action", required=True)
    ev = msub.add_parser("eval", parents=[common])
    ev.add_argument("--space", required=True)
    ev.add_argument("--mode", choices=mt.MODES, default="gauge")
    ev.add_argument("--x", type=_floats, required=True)
    ev.add_argument("--y", type=_floats, required=True)
    ev.add_argument("--depth", type=int, default=8)
    au = msub.add_parser("audit", parents=[common])
    au.add_argument("--space")
    au.add_argument("--mode", choices=mt.MODES, default="gauge")
    au.add_argument("--depth", type=int, default=8)
    au.add_argument("--samples", type=int, default=1000)

    co = sub.add_parser("convexity", parents=[common], help="convex-structure checks")
    csub = co.add_subparsers(dest="action", required=True)
    ck = csub.add_parser("check", parents=[common])
    ck.add_argument("--which", choices=("tcs", "tmcs", "stability", "P", "Q"), required=True)
    ck.add_argument("--space")
    ck.add_argument("--samples", type=int, default=1000)
    ck.add_argument("--r", type=float, default=0.1)

    al = sub.add_parser("alpha", parents=[common], help="MNC bounds and hull net transfer")
    asub = al.add_subparsers(dest="action", required=True)
    ab = asub.add_parser("bounds", parents=[common])
    ab.add_argument("--space")
    ab.add_argument("--cloud", required=True)
    ab.add_argument("--eps-grid", type=_floats, required=True)
    ab.add_argument("--max-centers", type=int)
    tr = asub.add_parser("co-transfer", parents=[common])
    tr.add_argument("--space")
    tr.add_argument("--cloud", required=True)
    tr.add_argument("--eta", type=float, required=True)
    tr.add_argument("--eps", type=float, required=True)
    tr.add_argument("--resolution", type=int, default=4)

    fp = sub.add_parser("fixpoint", parents=[common], help="Darbo solver and condensing check")
    fsub = fp.add_subparsers(dest="action", required=True)
    da = fsub.add_parser("darbo", parents=[common])
    da.add_argument("--space")
    da.add_argument("--op", required=True)
    da.add_argument("--m0", required=True)
    da.add_argument("--tol", type=float, default=1e-6)
    da.add_argument("--max-iter", type=int, default=60)
    da.add_argument("--resolution", type=int, default=2)
    sa = fsub.add_parser("sadovskii", parents=[common])
    sa.add_argument("--space")
    sa.add_argument("--op", required=True)
    sa.add_argument("--trials", required=True)
    sa.add_argument("--eps-grid", type=_floats)
    sa.add_argument("--max-centers", type=int, default=3)

    ce = sub.add_parser("counterexample", parents=[common], help="int |.|^p scaling counterexample")
    ce.add_argument("--p", type=float, default=0.5)
    ce.add_argument("--lambda", dest="lam", type=float, default=0.25)

    su = sub.add_parser("suite", parents=[common], help="run a check suite")
    su.add_argument("name", choices=SUITES)
    su.add_argument("--input-dir", help="directory of space descriptor JSON files")
    su.add_argument("--samples", type=int, default=1000)
    return ap


def _load_space(path: str | None, default: SpaceModel | None = None) -> SpaceModel:
    if path is None:
        if default is None:
            raise InputError("--space is required")
        return default
    try:
        return SpaceModel.from_dict(load_json(path))
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad space descriptor {path}: {exc}") from exc


def _load_cloud(path: str, space: SpaceModel | None) -> PointCloud:
    try:
        d = load_json(path)
        return PointCloud.from_dict(d, space if "space" not in d else None)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad point cloud {path}: {exc}") from exc


def _result(args, name: str, checks: list[Check], extra: dict | None = None) -> int:
    header = {"seed": getattr(args, "seed", 42), "config": extra or {}}
    report = build_report(name, header, checks)
    text = emit_report(report, getattr(args, "out", None), getattr(args, "format", "json"))
    if getattr(args, "out", None) is None:
        sys.stdout.write(text)
    if report["summary"]["fail"]:
        sys.stderr.write("first failure: " + json.dumps(report["first_failure"], default=str) + "\n")
        return 1
    return 0


def _write_payload(args, payload: dict) -> int:
    from .report import canonical_json

    text = canonical_json(payload)
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_space(args) -> int:
    if args.list:
        return _write_payload(args, {"spaces": [s.to_dict() for s in shipped_spaces()]})
    if args.space:
        sp = _load_space(args.space)
    else:
        if not (args.kind and args.dim and args.m):
            raise InputError("give --space, --list, or --kind/--dim/--m")
        try:
            sp = make_space(args.kind, args.dim, args.m, json.loads(args.params))
        except (ValueError, TypeError) as exc:
            raise InputError(str(exc)) from exc
    return _write_payload(args, {"space": sp.to_dict(), "locally_convex": sp.locally_convex})


def cmd_metric(args) -> int:
    if args.action == "eval":
        sp = _load_space(args.space)
        try:
            m = mt.build_fnorm(sp, args.mode, depth=args.depth)
            d = float(m(np.array(args.x), np.array(args.y)))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return _write_payload(args, {"mode": args.mode, "distance": d})
    sp = _load_space(args.space, make_space("c-grid", 8, 4, {"step": 0.25}))
    seed = getattr(args, "seed", 42)
    rng = np.random.default_rng(seed)
    try:
        m = mt.build_fnorm(sp, args.mode, depth=args.depth)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    pairs = mt.sample_pairs(sp, args.samples, rng, scale=0.6)
    lams = 2.0 ** -np.arange(5) if args.mode == "paper" else rng.uniform(0, 1, 16)
    scaling = mt.audit_scaling(m, pairs, lams)
    additive = mt.audit_additive(m, mt.sample_pairs(sp, args.samples, rng, k=4, scale=0.6))
    triangle = mt.audit_axioms(m, mt.sample_pairs(sp, args.samples, rng, k=3, scale=0.6))["triangle"]
    payload = {"mode": args.mode, "seed": seed, "space": sp.to_dict(), "depth": args.depth,
               "cap_value": m.cap_value,
               "margins": {"scaling": scaling.max_margin, "additive": additive.max_margin,
                           "triangle": triangle.max_margin},
               "region_breakdown": scaling.regions}
    _write_payload(args, payload)
    ok = additive.passed and triangle.passed and (args.mode != "gauge" or scaling.passed)
    return 0 if ok else 1


def cmd_convexity(args) -> int:
    sp = _load_space(args.space, make_space("c-grid", 4, 2))
    seed = getattr(args, "seed", 42)
    rng = np.random.default_rng(seed)
    try:
        m = mt.build_fnorm(sp, "gauge")
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    n = args.samples
    U = rng.uniform(-1, 1, (n, 4, sp.dim))
    t = rng.uniform(0, 1, n)
    checks = []
    if args.which == "tcs":
        checks.append(Check.assert_le("tcs", "convex-structures",
                                      cx.check_tcs(m, U[:, 0], U[:, 1], U[:, 2], t).max(), 1e-9))
    elif args.which == "tmcs":
        w = rng.dirichlet(np.ones(3), n)
        checks.append(Check.assert_le("tmcs", "convex-structures",
                                      cx.check_tmcs(m, U[:, 0], U[:, 1], U[:, 2], U[:, 3], w).max(), 1e-9))
    elif args.which == "P":
        rep = cx.check_property_P(m, U, t)
        checks.append(Check.assert_le("P-conventional", "convex-structures",
                                      rep["conventional"].max_violation, 1e-9))
        checks.append(Check("P-printed", "convex-structures", rep["printed"].max_violation, None, "info"))
    elif args.which == "stability":
        gens = PointCloud(rng.uniform(-1, 1, (3, sp.dim)), sp, "C")
        rep = cx.check_stability(m, cx.hull_sample(gens, 4), args.r, n, 1e-9, seed, gens)
        checks.append(Check.assert_le("stability", "convex-structures", rep.max_violation, 1e-9,
                                      r=args.r, witness=rep.witness))
    else:
        gens = PointCloud(rng.uniform(-1, 1, (3, sp.dim)), sp, "F")
        rep = cx.check_property_Q(m, gens, [0.5, 0.25])
        checks.append(Check.assert_le("Q", "convex-structures", rep.max_violation, 0.0, **rep.params))
    return _result(args, f"convexity-{args.which}", checks, {"space": sp.to_dict(), "samples": n})


def cmd_alpha(args) -> int:
    space = _load_space(args.space) if args.space else None
    M = _load_cloud(args.cloud, space)
    m = mt.build_fnorm(M.space, "gauge")
    if args.action == "bounds":
        try:
            b = mnc.alpha_bounds(m, M, args.eps_grid, args.max_centers)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return _write_payload(args, b.to_dict())
    N = mnc.greedy_net(m, M, args.eta)
    try:
        res = mnc.net_transfer_co(m, M, N, args.eps, args.resolution)
    except cx.HullBudgetExceeded as exc:
        raise InputError(str(exc)) from exc
    return _write_payload(args, res.to_dict())


def _load_op(path: str, space: SpaceModel | None) -> OperatorSpec:
    try:
        d = load_json(path)
        return OperatorSpec.from_dict(d, space if "space" not in d else None)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad operator {path}: {exc}") from exc


def cmd_fixpoint(args) -> int:
    space = _load_space(args.space) if args.space else None
    op = _load_op(args.op, space)
    m = mt.build_fnorm(op.space, "gauge")
    if args.action == "darbo":
        M0 = _load_cloud(args.m0, op.space)
        try:
            trace = darbo_solve(op, M0, args.tol, args.max_iter, args.resolution, metric=m)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        payload = trace.emit(op, m)
        _write_payload(args, payload)
        return 0 if payload["converged"] else 1
    try:
        d = load_json(args.trials)
        items = d["clouds"] if isinstance(d, dict) else d
        trials = [PointCloud(np.asarray(c["points"] if isinstance(c, dict) else c, float), op.space)
                  for c in items]
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad trials {args.trials}: {exc}") from exc
    grid = args.eps_grid or mnc.geometric_grid(8.0, 1e-3, 8)
    return _write_payload(args, sadovskii_check(op, trials, grid, args.max_centers).to_dict())


def cmd_counterexample(args) -> int:
    x = np.zeros(4)
    y = np.array([1.0, 0.0, 0.0, 0.0])
    try:
        lhs, rhs, violated = mt.lp_counterexample(args.p, args.lam, x, y)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return _write_payload(args, {"p": args.p, "lambda": args.lam, "lhs": lhs, "rhs": rhs,
                                 "violated": violated})


def cmd_suite(args) -> int:
    cfg = RunConfig(seed=getattr(args, "seed", 42), samples=args.samples)
    if args.input_dir is not None:
        files = sorted(Path(args.input_dir).glob("*.json")) if Path(args.input_dir).is_dir() else []
        if not files:
            raise InputError(f"no space descriptors in {args.input_dir}")
        cfg.spaces = [_load_space(str(f)) for f in files]
    checks = run_checks(args.name, cfg)
    return _result(args, args.name, checks, cfg.header())


COMMANDS = {"space": cmd_space, "metric": cmd_metric, "convexity": cmd_convexity, "alpha": cmd_alpha,
            "fixpoint": cmd_fixpoint, "counterexample": cmd_counterexample, "suite": cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "budget"):
        os.environ["FMNC_BUDGET"] = str(args.budget)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
