"""Invariant checks run against registry problems.

Each check returns a :class:`CheckResult` with the measured statistic and
the threshold it is held to.  Suites are run one after another.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import RunFailedError
from .history import HistoryFunction, StackedHistory
from .picard import SolverConfig, contraction_ratios
from .process import augment, check_cocycle, clock_defect, clock_history, solve_process
from .semiflow import check_semigroup, check_uniqueness, march, semiflow
from .variational import fd_solution_derivative, oracle_distance, solve_variational
from .vide import as_nonautonomous, route_distance, solve_vide, volterra_direct

THRESHOLDS = {
    "horizon": 0.0,
    "semigroup": 1e-5,
    "cocycle": 1e-5,
    "clock": 1e-12,
    "contraction": 0.6,
    "uniqueness": 1e-6,
    "variational": 1e-4,
    "route": 5e-6,
}

SUITES = tuple(THRESHOLDS)

# problem kinds each suite applies to
APPLIES = {
    "horizon": ("dde", "process", "vide"),
    "semigroup": ("dde",),
    "cocycle": ("process", "vide"),
    "clock": ("process", "vide"),
    "contraction": ("dde", "process", "vide"),
    "uniqueness": ("dde",),
    "variational": ("dde",),
    "route": ("vide",),
}

DEFAULT_PROBLEM = {
    "horizon": "linear_const_delay",
    "semigroup": "linear_const_delay",
    "cocycle": "pantograph",
    "clock": "pantograph",
    "contraction": "linear_const_delay",
    "uniqueness": "exponential",
    "variational": "quadratic",
    "route": "cosh",
}


@dataclass
class CheckResult:
    suite: str
    problem: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self):
        return asdict(self)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.suite:<12} {self.problem:<32} {self.value:.3e} (limit {self.threshold:.1e}) {self.detail}"


def _nonautonomous(problem, cfg):
    if problem.kind == "vide":
        return as_nonautonomous(problem.rhs, cfg.grid_step)
    return problem.rhs


def _result(suite, problem, value, detail="", passed=None):
    limit = THRESHOLDS[suite]
    ok = value <= limit if passed is None else passed
    return CheckResult(suite, problem.name, float(value), limit, bool(ok), detail)


def check_horizon(problem, cfg):
    """The problem runs to its default horizon; the value is the shortfall."""
    if problem.kind == "dde":
        run = semiflow(problem.rhs, problem.history, problem.horizon, cfg)
        reached = run.reached_time
        term = run.termination.value
    else:
        g = _nonautonomous(problem, cfg)
        prun = solve_process(g, problem.t0 + problem.horizon, problem.t0, problem.history, cfg)
        reached = prun.run.reached_time
        term = prun.run.termination.value
    return _result("horizon", problem, max(0.0, problem.horizon - reached), term, passed=term == "HorizonReached")


def check_semigroup_law(problem, cfg, j=2):
    s = t = 0.35 * problem.horizon
    value = check_semigroup(problem.rhs, problem.history, s, t, j, cfg)
    return _result("semigroup", problem, value, f"s=t={s:g} j={j}")


def check_cocycle_law(problem, cfg, j=2):
    t0 = problem.t0
    t, s = t0 + 0.25 * problem.horizon, t0 + 0.5 * problem.horizon
    value = check_cocycle(_nonautonomous(problem, cfg), s, t, t0, problem.history, j, cfg)
    return _result("cocycle", problem, value, f"t0={t0:g} t={t:g} s={s:g} j={j}")


def check_clock(problem, cfg):
    prun = solve_process(_nonautonomous(problem, cfg), problem.t0 + problem.horizon, problem.t0, problem.history, cfg)
    prun.run.require()
    return _result("clock", problem, clock_defect(prun), f"nodes={len(prun.run.trajectory.nodes)}")


def contraction_statistics(f, run, cfg, n_pairs=20, seed=0):
    """Worst measured Picard-map ratio and worst residual ratio over a run's steps."""
    rng = np.random.default_rng(seed)
    worst_pair = 0.0
    worst_sweep = 0.0
    for step in run.steps:
        ratios = contraction_ratios(f, step.history, step.plan, n_pairs, rng, cfg, t0=step.start)
        worst_pair = max([worst_pair, *ratios])
        worst_sweep = max([worst_sweep, *step.report.ratios])
    return worst_pair, worst_sweep


def check_contraction(problem, cfg, n_pairs=20):
    if problem.kind == "dde":
        f, phi = problem.rhs, problem.history
    else:
        f = augment(_nonautonomous(problem, cfg)).rhs
        phi = StackedHistory([clock_history(problem.t0, max(problem.history.depth, 1.0)), problem.history])
    run = march(f, phi, problem.horizon, cfg)
    run.require()
    pair, sweep = contraction_statistics(f, run, cfg, n_pairs, cfg.seed)
    value = max(pair, sweep)
    return _result("contraction", problem, value, f"plans={len(run.steps)} pairs={pair:.3f} sweeps={sweep:.3f}")


def check_unique(problem, cfg, schedules=(1 / 32, 1 / 64)):
    t = problem.horizon
    value = check_uniqueness(problem.rhs, problem.history, t, schedules, cfg)
    return _result("uniqueness", problem, value, f"caps={schedules[0]:g},{schedules[1]:g} t={t:g}")


def check_variational(problem, cfg, h=1e-4, direction=None):
    t = problem.horizon
    direction = direction or HistoryFunction.constant(np.ones(problem.rhs.dim), problem.history.depth)
    base = semiflow(problem.rhs, problem.history, t, cfg).require()
    var = solve_variational(problem.rhs, base, direction, t, cfg)
    fd = fd_solution_derivative(problem.rhs, problem.history, direction, t, h, cfg)
    return _result("variational", problem, oracle_distance(var, fd), f"h={h:g} t={t:g}")


def check_route(problem, cfg):
    prun = solve_vide(problem.rhs, problem.horizon, cfg, problem.history)
    prun.run.require()
    nodes, values = volterra_direct(problem.rhs, problem.horizon, cfg.grid_step)
    return _result("route", problem, route_distance(prun, nodes, values), f"grid={cfg.grid_step:g}")


RUNNERS = {
    "horizon": check_horizon,
    "semigroup": check_semigroup_law,
    "cocycle": check_cocycle_law,
    "clock": check_clock,
    "contraction": check_contraction,
    "uniqueness": check_unique,
    "variational": check_variational,
    "route": check_route,
}


def run_check(suite, problem, cfg=None):
    """Run one suite; solver failures become a failed result rather than an exception."""
    cfg = cfg or SolverConfig()
    if problem.kind not in APPLIES[suite]:
        raise ValueError(f"suite {suite!r} does not apply to {problem.kind} problem {problem.name}")
    try:
        return RUNNERS[suite](problem, cfg)
    except RunFailedError as exc:
        return CheckResult(suite, problem.name, float("inf"), THRESHOLDS[suite], False, str(exc))
