"""Command-line front end.

Exit status: 0 on success, 1 when a solver run or a check fails (the JSON
summary is still written), 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checks
from .errors import DDEError, RunFailedError
from .history import write_csv
from .numerics import QuadratureRule, Tolerance
from .picard import SolverConfig
from .problems import ProblemSpecError, UnknownProblemError, parse_history, parse_problem
from .process import clock_defect, solve_process
from .semiflow import semiflow
from .variational import fd_solution_derivative, oracle_distance, solve_variational
from .vide import as_nonautonomous, route_distance, solve_vide, volterra_direct

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

# config-file keys and how to parse them
CONFIG_KEYS = {
    "problem": str,
    "history": str,
    "horizon": float,
    "t0": float,
    "t": float,
    "grid_step": float,
    "atol": float,
    "rtol": float,
    "max_iters": int,
    "seed": int,
    "quadrature": str,
    "s_min": float,
    "max_step": float,
    "direction": str,
    "fd_step": float,
    "output": str,
    "summary": str,
}


class UsageError(Exception):
    pass


def read_config_file(path):
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: expected one of {', '.join(sorted(CONFIG_KEYS))} as key=value")
        try:
            out[key] = CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from None
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help='registry problem, e.g. "linear_const_delay(-1, 1)"')
    common.add_argument("--history", help="const:c | linear:a,b | samples:path.csv")
    common.add_argument("--horizon", type=float)
    common.add_argument("--grid-step", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--rtol", type=float)
    common.add_argument("--max-iters", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--quadrature", choices=["trapezoid", "simpson"])
    common.add_argument("--s-min", type=float)
    common.add_argument("--max-step", type=float)
    common.add_argument("--config", help="file of key=value lines; flags override it")
    common.add_argument("--output", help="CSV output path (default: stdout)")
    common.add_argument("--summary", help="JSON summary path")

    parser = argparse.ArgumentParser(prog="unbounded-dde", description="Solve delay equations with unbounded delay.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve-dde", parents=[common], help="autonomous equation x'(t) = f(x_t)")
    p = sub.add_parser("solve-process", parents=[common], help="nonautonomous equation from t0 to t")
    p.add_argument("--t0", type=float)
    p.add_argument("--t", type=float)
    p = sub.add_parser("solve-vide", parents=[common], help="Volterra integro-differential equation")
    p.add_argument("--oracle", action="store_true", help="also run the direct Volterra scheme and report the distance")
    p = sub.add_parser("variational", parents=[common], help="variational equation with a finite-difference comparison")
    p.add_argument("--direction", help="direction history spec (default const:1)")
    p.add_argument("--fd-step", type=float)
    p = sub.add_parser("check", parents=[common], help="run invariant suites")
    p.add_argument("--suite", action="append", choices=[*checks.SUITES, "all"], help="repeatable; default all applicable")
    return parser


def resolve(args):
    """Merge config file values under command-line flags."""
    values = read_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if val is not None and key not in ("config", "command"):
            values[key] = val
    return values


def solver_config(opts):
    base = SolverConfig()
    tol = Tolerance(
        atol=opts.get("atol", base.tol.atol),
        rtol=opts.get("rtol", base.tol.rtol),
        max_iters=opts.get("max_iters", base.tol.max_iters),
    )
    changes = {"tol": tol}
    for key in ("grid_step", "seed", "s_min", "max_step"):
        if key in opts:
            changes[key] = opts[key]
    if "quadrature" in opts:
        changes["rule"] = QuadratureRule(opts["quadrature"])
    cfg = base.replace(**changes)
    if not cfg.grid_step > 0:
        raise UsageError("grid step must be positive")
    return cfg


def _problem(opts, kinds, default=None):
    spec = opts.get("problem", default)
    if spec is None:
        raise UsageError("--problem is required")
    problem = parse_problem(spec)
    if problem.kind not in kinds:
        raise UsageError(f"{problem.name} is a {problem.kind} problem; this command needs {' or '.join(kinds)}")
    return problem


def _history(opts, problem, key="history"):
    if key not in opts:
        return problem.history
    return parse_history(opts[key], problem.rhs.dim, max(problem.history.depth, 1.0))


def _horizon(opts, problem):
    T = opts.get("horizon", problem.horizon)
    if T < 0:
        raise UsageError("horizon must be nonnegative")
    return T


def _emit_csv(opts, times, values, derivs=None, out=None):
    path = opts.get("output")
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_csv(fh, times, values, derivs)
    else:
        write_csv(out or sys.stdout, times, values, derivs)


def _emit_summary(opts, summary):
    path = opts.get("summary")
    if path:
        Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_summary(run, problem):
    out = run.summary()
    out["problem"] = problem.name
    out["message"] = run.message
    out["picard_reports"] = [s.report.to_dict() for s in run.steps]
    return out


def cmd_solve_dde(opts):
    problem = _problem(opts, ("dde",))
    cfg = solver_config(opts)
    run = semiflow(problem.rhs, _history(opts, problem), _horizon(opts, problem), cfg)
    _emit_csv(opts, *run.trajectory.rows())
    _emit_summary(opts, _run_summary(run, problem))
    return EXIT_OK if run.ok else EXIT_FAILURE


def cmd_solve_process(opts):
    problem = _problem(opts, ("process", "vide"))
    cfg = solver_config(opts)
    t0 = opts.get("t0", problem.t0)
    t = opts.get("t", t0 + _horizon(opts, problem))
    if t < t0:
        raise UsageError("--t must not be smaller than --t0")
    g = as_nonautonomous(problem.rhs, cfg.grid_step) if problem.kind == "vide" else problem.rhs
    prun = solve_process(g, t, t0, _history(opts, problem), cfg)
    _emit_csv(opts, *prun.rows())
    summary = _run_summary(prun.run, problem)
    summary.update(t0=t0, t=t, reached_clock=prun.reached_clock, clock_defect=clock_defect(prun))
    _emit_summary(opts, summary)
    return EXIT_OK if prun.ok else EXIT_FAILURE


def cmd_solve_vide(opts):
    problem = _problem(opts, ("vide",), default="cosh")
    cfg = solver_config(opts)
    T = _horizon(opts, problem)
    prun = solve_vide(problem.rhs, T, cfg, _history(opts, problem))
    _emit_csv(opts, *prun.rows())
    summary = _run_summary(prun.run, problem)
    summary["clock_defect"] = clock_defect(prun)
    if opts.get("oracle") and prun.ok and T > 0:
        nodes, values = volterra_direct(problem.rhs, T, cfg.grid_step)
        summary["oracle_distance"] = route_distance(prun, nodes, values)
    _emit_summary(opts, summary)
    return EXIT_OK if prun.ok else EXIT_FAILURE


def cmd_variational(opts):
    problem = _problem(opts, ("dde",))
    cfg = solver_config(opts)
    T = _horizon(opts, problem)
    phi = _history(opts, problem)
    direction = parse_history(opts.get("direction", "const:1"), problem.rhs.dim, max(phi.depth, 1.0))
    h = opts.get("fd_step", 1e-4)
    base = semiflow(problem.rhs, phi, T, cfg)
    summary = {"problem": problem.name, "base": base.summary(), "fd_step": h}
    if not base.ok:
        summary["message"] = base.message
        _emit_summary(opts, summary)
        return EXIT_FAILURE
    var = solve_variational(problem.rhs, base, direction, T, cfg)
    _emit_csv(opts, *var.trajectory.rows())
    summary["variational"] = var.run.summary()
    if T > 0:
        fd = fd_solution_derivative(problem.rhs, phi, direction, T, h, cfg)
        summary["fd_distance"] = oracle_distance(var, fd)
    _emit_summary(opts, summary)
    return EXIT_OK


def cmd_check(opts, out):
    cfg = solver_config(opts)
    requested = opts.get("suite") or ["all"]
    suites = list(checks.SUITES) if "all" in requested else list(dict.fromkeys(requested))
    explicit = "problem" in opts
    results = []
    for suite in suites:
        if explicit:
            problem = parse_problem(opts["problem"])
            if problem.kind not in checks.APPLIES[suite]:
                if "all" in requested:
                    continue
                raise UsageError(f"suite {suite} does not apply to {problem.kind} problem {problem.name}")
        else:
            problem = parse_problem(checks.DEFAULT_PROBLEM[suite])
        result = checks.run_check(suite, problem, cfg)
        print(result.line(), file=out)
        results.append(result)
    passed = all(r.passed for r in results)
    _emit_summary(opts, {"passed": passed, "results": [r.to_dict() for r in results]})
    return EXIT_OK if passed else EXIT_FAILURE


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        if args.command == "check":
            return cmd_check(opts, out)
        handler = {
            "solve-dde": cmd_solve_dde,
            "solve-process": cmd_solve_process,
            "solve-vide": cmd_solve_vide,
            "variational": cmd_variational,
        }[args.command]
        return handler(opts)
    except (UsageError, UnknownProblemError, ProblemSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RunFailedError, DDEError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
