"""Command-line front-end.

Subcommands: verify, solve, bounds, estimate-b, demo. Exit codes are a
stable contract: 0 = success/verified, 1 = falsified or non-converged,
2 = usage error. PRESIC_LAB_SEED is the seed fallback when --seed is
absent. Outputs are reproducible for a fixed (problem, seed) up to the
timestamp field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import bmetric, contraction, operators, problem as problem_mod, solver
from .errors import PresicLabError, UsageError

DEMO_NAMES = ("paper-example-2-1-2", "paper-bmetric-examples", "paper-phi-anomaly")


def _emit(payload, args, fmt="json"):
    payload = dict(payload)
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        text = payload["csv"]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PRESIC_LAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError("PRESIC_LAB_SEED must be an integer") from None
    return 0


def cmd_verify(args):
    prob = problem_mod.load(args.problem)
    if prob.condition is None:
        raise UsageError("problem file has no 'condition' block")
    seed = _seed(args)
    grid = args.grid_points if args.grid else None
    if prob.condition.kind in contraction.DIAGONAL_KINDS:
        cert = contraction.verify_diagonal(prob.operator, prob.space, prob.condition,
                                           args.samples, seed, grid_points=grid,
                                           strict_domain=args.strict_domain)
    else:
        cert = contraction.verify(prob.operator, prob.space, prob.condition,
                                  args.samples, seed, grid_points=grid,
                                  strict_domain=args.strict_domain)
    _emit(cert.to_dict(), args)
    return 0 if cert.passed else 1


def _solve_trace(prob, args, seed):
    if prob.solve is None:
        raise UsageError("problem file has no 'solve' block")
    start = prob.solve["start"]
    if isinstance(start, str):  # "random"
        rng = np.random.default_rng(seed)
        if args.picard:
            start = rng.uniform(prob.space.domain.lo, prob.space.domain.hi)
        else:
            start = prob.space.domain.sample(rng, prob.operator.arity)
    if args.picard:
        x0 = np.asarray(start, dtype=float).reshape(-1)[: prob.space.dimension]
        return solver.picard(prob.operator, prob.space, x0, prob.solve["stop"],
                             strict_domain=args.strict_domain)
    return solver.iterate(prob.operator, prob.space, start, prob.solve["stop"],
                          strict_domain=args.strict_domain)


def cmd_solve(args):
    prob = problem_mod.load(args.problem)
    seed = prob.solve["seed"] if prob.solve and args.seed is None else _seed(args)
    trace = _solve_trace(prob, args, seed)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerows(trace.to_csv_rows())
        _emit({"csv": buf.getvalue()}, args, fmt="csv")
    else:
        payload = trace.to_dict()
        payload["seed"] = seed
        _emit(payload, args)
    return 0 if trace.stop_reason == "converged" else 1


def cmd_bounds(args):
    prob = problem_mod.load(args.problem)
    if args.eta is None and args.a is None:
        raise UsageError("bounds requires --eta or --a")
    seed = prob.solve["seed"] if prob.solve and args.seed is None else _seed(args)
    trace = _solve_trace(prob, args, seed)
    k, b = prob.operator.arity, prob.space.b
    if args.eta is not None:
        report = solver.presic_bounds(trace, args.eta, b, k)
        payload = report.to_dict()
        payload["alphas"] = [float(v) for v in trace.alphas]
    else:
        lam = args.a * k * b ** k
        if not b * lam < 1:
            raise UsageError("requires a*k*b^(k+1) < 1")
        pts = np.asarray(trace.points)
        n_pts = len(pts)
        bounds = [solver.kannan_bounds(args.a, k, b, float(trace.alphas[0]) if len(trace.alphas) else 0.0, n)
                  for n in range(n_pts)]
        within = True
        for n in range(n_pts):
            d = prob.space.distance_batch(np.repeat(pts[n][None, :], n_pts - n - 1, axis=0), pts[n + 1:])
            if len(d) and not bool(np.all(bmetric.leq_tol(d, bounds[n]))):
                within = False
        payload = {"a": args.a, "lambda": lam, "b_lambda": b * lam,
                   "tail_bounds": bounds, "all_steps_within": within}
    _emit(payload, args)
    return 0


def cmd_estimate_b(args):
    prob = problem_mod.load(args.problem)
    seed = _seed(args)
    grid = args.grid_points if args.grid else None
    result = bmetric.estimate_b(prob.space, args.samples, seed, grid_points=grid)
    payload = {
        "b_hat": result["b_hat"],
        "declared_b": prob.space.b,
        "witness": [[float(v) for v in pt] for pt in result["witness"]],
    }
    _emit(payload, args)
    return 0


def _demo_iteration_example(args):
    rows = []
    ok_all = True
    for k in (1, 2, 3, 5):
        box = bmetric.Box(np.zeros(1), np.full(1, 2.0))
        space = bmetric.squared_euclidean(box)
        op = operators.averaging(k)
        rng = np.random.default_rng(_seed(args))
        stop = solver.StopRule(residual_tol=1e-20, step_tol=1e-20)
        worst = 0.0
        for _ in range(20):
            start = box.sample(rng, k)
            trace = solver.iterate(op, space, start, stop)
            worst = max(worst, float(np.abs(trace.limit).max()) if trace.limit is not None else np.inf)
            if trace.stop_reason != "converged":
                ok_all = False
        ok = worst < 1e-8
        ok_all = ok_all and ok
        rows.append((f"k={k}", "pass" if ok else "FAIL", f"max |limit| = {worst:.3e}"))
    return rows, ok_all


def _demo_bmetric_constants(args):
    rows = []
    ok_all = True
    box = bmetric.Box(np.zeros(1), np.full(1, 2.0))
    for p in (2.0, 3.0):
        est = bmetric.estimate_b(bmetric.power(p, box), 0, _seed(args), grid_points=100)
        target = 2.0 ** (p - 1.0)
        ok = target - 0.05 <= est["b_hat"] <= target + 1e-9
        ok_all = ok_all and ok
        rows.append((f"power p={p:g}", "pass" if ok else "FAIL",
                     f"b_hat = {est['b_hat']:.6f}, declared {target:g}"))
    box4 = bmetric.Box(np.zeros(4), np.full(4, 2.0))
    est = bmetric.estimate_b(bmetric.lp_truncated(0.5, box4), 20000, _seed(args))
    ok = est["b_hat"] <= 4.0 + 1e-9
    ok_all = ok_all and ok
    rows.append(("lp p=1/2 dim=4", "pass" if ok else "FAIL",
                 f"b_hat = {est['b_hat']:.6f} <= 4"))
    est = bmetric.estimate_b(bmetric.squared_euclidean(box), 0, _seed(args), grid_points=100)
    ok = est["b_hat"] <= 2.0 + 1e-9 and est["b_hat"] > 1.9
    ok_all = ok_all and ok
    rows.append(("squared_euclidean", "pass" if ok else "FAIL",
                 f"b_hat = {est['b_hat']:.6f}, declared 2"))
    return rows, ok_all


def _demo_phi_anomaly(args):
    box = bmetric.Box(np.zeros(1), np.full(1, 2.0))
    space = bmetric.squared_euclidean(box)
    op = operators.averaging(1)
    cond = contraction.weak_phi(contraction.piecewise_phi())
    cert = contraction.verify(op, space, cond, max(args.samples, 2000), _seed(args))
    rows = []
    if cert.verdict == "falsified":
        w = cert.witness
        rows.append(("full box [0,2]", "falsified",
                     f"window {np.asarray(w.window).ravel().tolist()} "
                     f"lhs={w.lhs:.6f} rhs={w.rhs:.6f}"))
        ok = w.rhs < w.lhs
    else:
        rows.append(("full box [0,2]", "passed (unexpected)", ""))
        ok = False
    sub = bmetric.squared_euclidean(bmetric.Box(np.zeros(1), np.full(1, 1.5)))
    cert2 = contraction.verify(op, sub, cond, max(args.samples, 2000), _seed(args))
    rows.append(("sub-box [0,1.5]", cert2.verdict,
                 f"slack_min = {cert2.slack_min:.6f}"))
    ok = ok and cert2.passed
    return rows, ok


def cmd_demo(args):
    if args.name == "paper-example-2-1-2":
        rows, ok = _demo_iteration_example(args)
    elif args.name == "paper-bmetric-examples":
        rows, ok = _demo_bmetric_constants(args)
    elif args.name == "paper-phi-anomaly":
        rows, ok = _demo_phi_anomaly(args)
    else:
        raise UsageError(f"unknown demo {args.name!r}; choose from {', '.join(DEMO_NAMES)}")
    width = max(len(r[0]) for r in rows)
    print(f"demo: {args.name}")
    for label, status, detail in rows:
        print(f"  {label.ljust(width)}  {status:10}  {detail}")
    print("overall:", "pass" if ok else "FAIL")
    return 0 if ok else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--grid", action="store_true",
                        help="deterministic grid sampling instead of random")
    common.add_argument("--grid-points", type=int, default=25)
    common.add_argument("--picard", action="store_true",
                        help="iterate the diagonal map instead of the k-step scheme")
    common.add_argument("--strict-domain", action="store_true")

    parser = argparse.ArgumentParser(prog="presic-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check a contraction condition")
    p.add_argument("problem")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("solve", parents=[common], help="run the iteration")
    p.add_argument("problem")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("bounds", parents=[common], help="per-step and tail error bounds")
    p.add_argument("problem")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("estimate-b", parents=[common], help="empirical relaxation constant")
    p.add_argument("problem")
    p.set_defaults(fn=cmd_estimate_b)

    p = sub.add_parser("demo", parents=[common], help="bundled reproductions")
    p.add_argument("name")
    p.set_defaults(fn=cmd_demo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PresicLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
