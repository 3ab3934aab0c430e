"""Command-line front end: solve, compare, repro, and verify.

Exit codes encode the run outcome for scripting:
0 solved, 2 diverging, 3 cycle detected, 4 iteration cap reached,
5 degenerate projection, 1 input or usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import repro as repro_mod
from . import verifier as verifier_mod
from .engine import (
    CycleDetected,
    DegenerateProjection,
    Diverging,
    MaxIterations,
    Solved,
    Trace,
    run_ap,
    run_dr_generic,
)
from .geometry import HalfSpace
from .problems import ProblemFormatError, load_problem
from .sets import DegenerateProjectionError

__all__ = ["main"]

EXIT_CODES = {
    Solved: 0,
    Diverging: 2,
    CycleDetected: 3,
    MaxIterations: 4,
    DegenerateProjection: 5,
}


def _fmt_point(p) -> str:
    return "(" + ", ".join("%g" % v for v in np.asarray(p).ravel()) + ")"


def _summary(outcome) -> str:
    if isinstance(outcome, Solved):
        return (f"Solved q*={_fmt_point(outcome.q)} "
                f"in {outcome.iterations} iterations")
    if isinstance(outcome, Diverging):
        cert = outcome.certificate
        return (f"Diverging: certificate increment {cert.increment:g} "
                f"from index {cert.start_index}, constant "
                f"q={_fmt_point(cert.q_fixed)}")
    if isinstance(outcome, CycleDetected):
        return (f"CycleDetected: period {outcome.period}, "
                f"first seen at index {outcome.first_index}")
    if isinstance(outcome, MaxIterations):
        note = " (norm cap reached)" if outcome.norm_capped else ""
        return (f"MaxIterations: final d(q,H)={outcome.final_dist:.6g}, "
                f"beta estimate {outcome.beta_estimate:.6g}{note}")
    return f"DegenerateProjection at index {outcome.at_index}"


def trace_to_csv(trace: Trace) -> str:
    """One row per step; float repr keeps output byte-identical per input."""
    if not trace.records:
        return ""
    n = trace.records[0].x.size
    header = (["k"] + [f"x{i}" for i in range(n)] + [f"q{i}" for i in range(n)]
              + ["d_xH", "d_qH", "d_xL"])
    lines = [",".join(header)]
    for r in trace.records:
        row = ([str(r.k)] + [repr(float(v)) for v in r.x]
               + [repr(float(v)) for v in r.q]
               + [repr(r.d_xH), repr(r.d_qH), repr(r.d_xL)])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trace_to_json(trace: Trace, outcome) -> str:
    records = [
        {
            "k": r.k,
            "x": [float(v) for v in r.x],
            "q": [float(v) for v in r.q],
            "d_xH": r.d_xH,
            "d_qH": r.d_qH,
            "d_xL": r.d_xL,
        }
        for r in trace.records
    ]
    payload = {
        "fingerprint": trace.fingerprint,
        "outcome": type(outcome).__name__,
        "summary": _summary(outcome),
        "records": records,
    }
    return json.dumps(payload, indent=2) + "\n"


def _add_override_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None,
                   help="membership tolerance for the stopping rule")
    p.add_argument("--cycle-tol", type=float, default=None,
                   help="state quantization grid for cycle detection")
    p.add_argument("--window", type=int, default=None,
                   help="evidence window for the divergence certificate")
    p.add_argument("--tie-rule", choices=["first", "rotate", "random"],
                   default=None)
    p.add_argument("--reflect-order",
                   choices=["set-first", "constraint-first"], default=None)
    p.add_argument("--seed", type=int, default=None)


def _apply_overrides(cfg, args):
    updates = {}
    if args.max_iter is not None:
        updates["max_iter"] = args.max_iter
    if args.tol is not None:
        updates["eps_h"] = args.tol
    if args.cycle_tol is not None:
        updates["eps_cycle"] = args.cycle_tol
    if args.window is not None:
        updates["window"] = args.window
    if args.tie_rule is not None:
        updates["tie_rule"] = args.tie_rule
    if args.reflect_order is not None:
        updates["reflect_order"] = args.reflect_order
    if args.seed is not None:
        updates["seed"] = args.seed
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _load(args):
    problem = load_problem(args.problem)
    constraint, proj_set, x0, cfg = problem.build()
    return constraint, proj_set, x0, _apply_overrides(cfg, args)


def _emit_trace(trace, outcome, args) -> None:
    if args.output is None:
        return
    text = (trace_to_json(trace, outcome) if args.format == "json"
            else trace_to_csv(trace))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_solve(args) -> int:
    constraint, proj_set, x0, cfg = _load(args)
    try:
        trace, outcome = run_dr_generic(constraint, proj_set, x0, cfg)
    except DegenerateProjectionError:
        print("error: projection degenerate at the start point",
              file=sys.stderr)
        return 5
    _emit_trace(trace, outcome, args)
    print(_summary(outcome))
    return EXIT_CODES[type(outcome)]


def cmd_compare(args) -> int:
    constraint, proj_set, x0, cfg = _load(args)
    dr_trace, dr_out = run_dr_generic(constraint, proj_set, x0, cfg)
    ap_trace, ap_out = run_ap(proj_set, constraint, x0, cfg)
    rows = [
        ("method", "outcome", "steps", "final d(x,H)", "final d(q,H)"),
        ("DR", _summary(dr_out), str(len(dr_trace)),
         f"{dr_trace.records[-1].d_xH:.3g}", f"{dr_trace.records[-1].d_qH:.3g}"),
        ("AP", _summary(ap_out), str(len(ap_trace)),
         f"{ap_trace.records[-1].d_xH:.3g}", f"{ap_trace.records[-1].d_qH:.3g}"),
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


def cmd_repro(args) -> int:
    if args.name == "all":
        names = list(repro_mod.EXPERIMENTS)
    elif args.name in repro_mod.EXPERIMENTS:
        names = [args.name]
    else:
        print(f"error: unknown experiment {args.name!r}; choose from "
              f"{', '.join(sorted(repro_mod.EXPERIMENTS))} or 'all'",
              file=sys.stderr)
        return 1
    all_passed = True
    for name in names:
        result = repro_mod.run_experiment(name)
        print(result.summary())
        all_passed &= result.passed
    return 0 if all_passed else 1


def cmd_verify(args) -> int:
    dims = tuple(int(d) for d in args.dims.split(","))
    reports = verifier_mod.run_all_suites(
        trials=args.trials, dims=dims, seed=args.seed,
        oracle_trials=args.oracle_trials,
    )
    for report in reports:
        print(json.dumps(report.to_json_dict(), indent=2))
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drfeas",
        description="Douglas-Rachford feasibility solver for a constraint "
                    "set paired with a (possibly non-convex) projectable set",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the solver on a problem file")
    p_solve.add_argument("problem", help="path to a JSON problem file")
    _add_override_flags(p_solve)
    p_solve.add_argument("--format", choices=["csv", "json"], default="csv")
    p_solve.add_argument("--output", default=None,
                         help="trace destination ('-' for stdout)")
    p_solve.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser(
        "compare",
        help="run the split method and alternating projections side by side",
    )
    p_cmp.add_argument("problem")
    _add_override_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_repro = sub.add_parser("repro", help="run named experiments")
    p_repro.add_argument("name", help="experiment name or 'all'")
    p_repro.set_defaults(func=cmd_repro)

    p_verify = sub.add_parser("verify", help="run the property suites")
    p_verify.add_argument("--trials", type=int, default=10000)
    p_verify.add_argument("--oracle-trials", type=int, default=100)
    p_verify.add_argument("--dims", default="1,2,3,4,5",
                          help="comma-separated ambient dimensions")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
