"""Command-line front end: ``bezier-bvp <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 solver failure (error JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from typing import Sequence

from . import __version__
from .bernstein import approximate, curve_eval
from .engine import SolverConfig, uniform_grid, sample, solve
from .errors import BezierBvpError, ExprSyntaxError, NotFound
from .expr import evaluate, parse
from .oracle import IvpSpec, integrate
from .pivot import compute_pivot
from .problems import BvpProblem, builtin, from_expression

log = logging.getLogger("bezier_bvp")

DEFAULT_DT = {"RICCATI": 0.15}
FORMATS = ("csv", "json", "gnuplot")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _problem_args() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("problem")
    g.add_argument("--problem", help="built-in problem: linear_exp, parabola, riccati")
    g.add_argument("--expr", help="residual G(x, y, dy) whose zero set is the ODE")
    g.add_argument("--a", type=float, help="left abscissa")
    g.add_argument("--b", type=float, help="right abscissa")
    g.add_argument("--ya", type=float, help="y(a)")
    g.add_argument("--yb", type=float, help="y(b)")
    g.add_argument("--rhs", help="explicit y' = g(x, y) for the reference integrator (with --expr)")
    g.add_argument("--solved", help="solved form y = F(x, dy) used for local errors (with --expr)")
    return p


def _solver_args() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("solver")
    g.add_argument("--dt", type=float, help="parameter step (default 0.1; 0.15 for riccati)")
    g.add_argument("--max-iter", type=int, default=50)
    g.add_argument("--correction", choices=("mean", "pointwise"),
                   help="insertion correction (default: the problem's preference, else mean)")
    g.add_argument("--criterion", choices=("trial", "current"), default="trial")
    g.add_argument("--placement", choices=("abscissa", "tag"), default="abscissa")
    return p


def _output_args(default_format: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=FORMATS, default=default_format)
    p.add_argument("--out", help="write to this file instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bezier-bvp", description="Bezier/Bernstein solver for first-order BVPs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    prob, solv = _problem_args(), _solver_args()

    sub.add_parser("pivot", parents=[prob, _output_args("json")], help="boundary slopes and pivot")
    sub.add_parser("solve", parents=[prob, solv, _output_args("json")], help="full run with report")
    sp = sub.add_parser("sample", parents=[prob, solv, _output_args("csv")], help="table on a t-grid")
    sp.add_argument("--grid", type=int, default=11, help="number of equally spaced t values")
    op = sub.add_parser("oracle", parents=[prob, _output_args("csv")], help="reference IVP trajectory")
    op.add_argument("--grid", type=int, help="resample at this many equally spaced x (default: nodes)")
    op.add_argument("--rtol", type=float, default=1e-9)
    op.add_argument("--atol", type=float, default=1e-9)
    cp = sub.add_parser("compare", parents=[prob, solv, _output_args("csv")],
                        help="solve and compare against the exact solution or the integrator")
    cp.add_argument("--grid", type=int, default=11)
    ap = sub.add_parser("approx", parents=[_output_args("csv")], help="Bernstein approximation of f on [0,1]")
    ap.add_argument("--function", default="exp(x)", help="expression in x")
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--grid", type=int, default=11)
    return parser


def resolve_problem(args) -> BvpProblem:
    if (args.problem is None) == (args.expr is None):
        raise UsageError("give exactly one of --problem or --expr")
    if args.problem is not None:
        if any(getattr(args, k) is not None for k in ("a", "b", "ya", "yb", "rhs", "solved")):
            raise UsageError("--a/--b/--ya/--yb/--rhs/--solved only apply with --expr")
        return builtin(args.problem)
    missing = [f"--{k}" for k in ("a", "b", "ya", "yb") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"--expr requires {', '.join(missing)}")
    try:
        return from_expression(args.expr, args.a, args.b, args.ya, args.yb,
                               rhs_text=args.rhs, solved_text=args.solved)
    except ExprSyntaxError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def solver_config(args, problem: BvpProblem) -> SolverConfig:
    dt = args.dt if args.dt is not None else DEFAULT_DT.get(problem.name, 0.1)
    try:
        return SolverConfig(dt=dt, max_iterations=args.max_iter, correction=args.correction,
                            criterion=args.criterion, placement=args.placement)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid(n: int) -> list[float]:
    if n < 2:
        raise UsageError("--grid must be at least 2")
    return uniform_grid(n)


# ---------------------------------------------------------------- formatting

def fmt6(v) -> str:
    """Six significant digits; blank for missing values."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


def render_table(columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(fmt6(v) for v in row) for row in rows]
    else:
        lines = ["# " + " ".join(columns)]
        lines += [" ".join(fmt6(v) if v is not None else "?" for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _problem_json(problem: BvpProblem) -> dict:
    return {"name": problem.name, "residual": problem.source, "a": problem.a, "b": problem.b,
            "y_a": problem.y_a, "y_b": problem.y_b}


def _pivot_json(res) -> dict:
    return {
        "pivot": list(res.pivot),
        "slopes_a": res.slopes_a,
        "slopes_b": res.slopes_b,
        "candidates": [{"slope_a": c.slope_a, "slope_b": c.slope_b, "p": c.p, "q": c.q,
                        "distance": c.distance} for c in res.candidates],
        "chosen_index": res.chosen_index,
    }


def _sample_rows(rows, with_ref: bool):
    if with_ref:
        return ["t", "x", "y", "ref", "dev"], [(r.t, r.x, r.y, r.ref, r.dev) for r in rows]
    return ["t", "x", "y"], [(r.t, r.x, r.y) for r in rows]


def _samples_json(rows) -> list[dict]:
    out = []
    for r in rows:
        d = {"t": r.t, "x": r.x, "y": r.y}
        if r.ref is not None:
            d.update(ref=r.ref, dev=r.dev)
        out.append(d)
    return out


def solve_report(result, rows) -> dict:
    return {
        "problem": _problem_json(result.problem),
        "config": result.config.as_dict(),
        "pivot": _pivot_json(result.pivot),
        "iterations": [r.as_dict() for r in result.records],
        "polygon": [{"tag": t, "x": float(x), "y": float(y)}
                    for (x, y), t in zip(result.final_polygon.points, result.final_polygon.tags)],
        "stop_reason": result.stop_reason.value,
        "accepted_iterations": result.accepted_iterations,
        "degree": result.degree,
        "samples": _samples_json(rows),
    }


# ---------------------------------------------------------------- commands

def _reference_for(problem: BvpProblem):
    """Closed-form solution if known, else an integrated trajectory, else None."""
    if problem.exact is not None:
        return problem.exact
    if problem.rhs is not None:
        return integrate(IvpSpec(problem.rhs, problem.a, problem.y_a, problem.b))
    return None


def cmd_pivot(args) -> str:
    problem = resolve_problem(args)
    res = compute_pivot(problem)
    if args.format == "json":
        return dump_json({"problem": _problem_json(problem), **_pivot_json(res)})
    cols = ["slope_a", "slope_b", "p", "q", "distance", "chosen"]
    rows = [(c.slope_a, c.slope_b, c.p, c.q, c.distance, k == res.chosen_index)
            for k, c in enumerate(res.candidates)]
    return render_table(cols, rows, args.format)


def cmd_solve(args) -> str:
    problem = resolve_problem(args)
    result = solve(problem, solver_config(args, problem))
    rows = sample(result, uniform_grid(11))
    if args.format == "json":
        return dump_json(solve_report(result, rows))
    poly = result.final_polygon
    return render_table(["tag", "x", "y"], [(t, float(x), float(y)) for (x, y), t in zip(poly.points, poly.tags)],
                        args.format)


def cmd_sample(args) -> str:
    problem = resolve_problem(args)
    ts = _grid(args.grid)
    result = solve(problem, solver_config(args, problem))
    rows = sample(result, ts)
    if args.format == "json":
        return dump_json(_samples_json(rows))
    cols, data = _sample_rows(rows, problem.exact is not None)
    return render_table(cols, data, args.format)


def cmd_oracle(args) -> str:
    problem = resolve_problem(args)
    if problem.rhs is None:
        raise UsageError("the reference integrator needs an explicit right-hand side (--rhs)")
    traj = integrate(IvpSpec(problem.rhs, problem.a, problem.y_a, problem.b, args.rtol, args.atol))
    if args.grid is None:
        pts = list(zip(traj.xs.tolist(), traj.ys.tolist()))
    else:
        n = args.grid
        if n < 2:
            raise UsageError("--grid must be at least 2")
        xs = [problem.a + (problem.b - problem.a) * i / (n - 1) for i in range(n)]
        pts = [(x, traj(x)) for x in xs]
    if args.format == "json":
        return dump_json({"problem": _problem_json(problem), "y_end": traj.y_end,
                          "target": problem.y_b, "deviation": traj.y_end - problem.y_b,
                          "trajectory": [{"x": x, "y": y} for x, y in pts]})
    return render_table(["x", "y"], pts, args.format)


def cmd_compare(args) -> str:
    problem = resolve_problem(args)
    ts = _grid(args.grid)
    result = solve(problem, solver_config(args, problem))
    reference = _reference_for(problem)
    if reference is None:
        raise UsageError("no reference available: supply --rhs for the integrator")
    rows = sample(result, ts, reference)
    if args.format == "json":
        devs = [abs(r.dev) for r in rows]
        return dump_json({"problem": _problem_json(problem),
                          "reference": "exact" if problem.exact is not None else "oracle",
                          "max_abs_dev": max(devs), "samples": _samples_json(rows)})
    cols, data = _sample_rows(rows, True)
    return render_table(cols, data, args.format)


def cmd_approx(args) -> str:
    tree = parse(args.function)
    if args.degree < 1:
        raise UsageError("--degree must be at least 1")

    def f(x):
        return evaluate(tree, x=x)

    poly = approximate(f, args.degree)
    rows = []
    for t in _grid(args.grid):
        pt = curve_eval(poly, t)
        ref = f(pt.x)
        rows.append((t, pt.x, pt.y, ref, pt.y - ref))
    if args.format == "json":
        return dump_json({"function": args.function, "degree": args.degree,
                          "max_abs_dev": max(abs(r[4]) for r in rows),
                          "samples": [dict(zip(("t", "x", "y", "ref", "dev"), r)) for r in rows]})
    return render_table(["t", "x", "y", "ref", "dev"], rows, args.format)


COMMANDS = {
    "pivot": cmd_pivot,
    "solve": cmd_solve,
    "sample": cmd_sample,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "approx": cmd_approx,
}


def _configure_logging() -> None:
    level = os.environ.get("BEZIER_BVP_LOG")
    if not level:
        return
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level.upper(), logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def _fail(code: int, exc: BaseException) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ExprSyntaxError):
        payload["offset"] = exc.offset
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            if not os.environ.get("BEZIER_BVP_LOG"):
                warnings.simplefilter("ignore")
            text = COMMANDS[args.command](args)
    except (UsageError, ExprSyntaxError, NotFound) as exc:
        return _fail(1, exc)
    except BezierBvpError as exc:
        return _fail(2, exc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
