"""Global solutions by continuation of local Picard solves.

Each step re-plans from scratch at the segment reached so far.  Failures do
not raise: they end the run with a termination reason and keep the partial
trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, DomainExitError, NonconvergenceError, RunFailedError, StepSelectionError
from .history import History, Trajectory, history_distance
from .picard import PicardReport, SolverConfig, StepPlan, plan_step, solve_local, window_depth


class Termination(str, Enum):
    HORIZON_REACHED = "HorizonReached"
    STEP_SELECTION_FAILED = "StepSelectionFailed"
    DOMAIN_EXIT = "DomainExit"
    NONCONVERGENCE = "Nonconvergence"


@dataclass
class StepRecord:
    start: float
    plan: StepPlan
    report: PicardReport
    history: History = field(repr=False)


@dataclass
class SemiflowRun:
    initial: History
    target: float
    reached_time: float
    trajectory: Trajectory
    termination: Termination
    steps: list = field(default_factory=list)
    message: str = ""

    @property
    def ok(self):
        return self.termination is Termination.HORIZON_REACHED

    def require(self):
        if not self.ok:
            raise RunFailedError(f"run stopped at t={self.reached_time:.6g}: {self.termination.value} ({self.message})", run=self)
        return self

    def state(self, t=None, depth=None):
        """The segment ``x_t`` (default: at the reached time)."""
        t = self.reached_time if t is None else t
        return self.trajectory.segment(t, depth)

    @property
    def total_picard_iterations(self):
        return sum(s.report.iterations for s in self.steps)

    def summary(self):
        return {
            "termination": self.termination.value,
            "reached_time": float(self.reached_time),
            "steps": len(self.steps),
            "total_picard_iterations": int(self.total_picard_iterations),
        }


def _initial_deriv(f, phi):
    try:
        if f.domain_at(0.0, phi):
            v = f.evaluate_at(0.0, phi)
            if np.all(np.isfinite(v)):
                return v
    except DomainError:
        pass
    return None


def march(f, phi, t, cfg=None, t0=0.0):
    """Continue local solves of a field from ``phi`` up to relative time ``t``.

    ``f`` is anything with the ``evaluate_at``/``derivative_at``/``domain_at``
    protocol; ``t0`` offsets the time passed to it.
    """
    cfg = cfg or SolverConfig()
    if t < 0:
        raise DomainError("horizon must be nonnegative")
    v0 = phi.evaluate(0.0)
    d0 = _initial_deriv(f, phi)
    nodes = [np.zeros(1)]
    values = [v0[None, :]]
    derivs = [(np.zeros_like(v0) if d0 is None else d0)[None, :]]
    traj = Trajectory(phi, nodes[0], values[0], derivs[0])
    steps = []
    tau = 0.0
    k0 = 0
    on_grid = True
    termination = Termination.HORIZON_REACHED
    message = ""
    end_slack = 1e-9 * max(1.0, t)
    while tau < t - end_slack:
        hist = traj.segment(tau, window_depth(f, tau))
        try:
            plan = plan_step(f, hist, cfg, t0=t0 + tau, max_step=t - tau)
            local, report = solve_local(f, hist, plan, cfg, t0=t0 + tau)
        except StepSelectionError as exc:
            termination, message = Termination.STEP_SELECTION_FAILED, str(exc)
            break
        except DomainExitError as exc:
            termination, message = Termination.DOMAIN_EXIT, str(exc)
            break
        except NonconvergenceError as exc:
            termination, message = Termination.NONCONVERGENCE, str(exc)
            break
        steps.append(StepRecord(tau, plan, report, hist))
        m = len(local.nodes) - 1
        if on_grid and plan.on_grid:
            new_nodes = (k0 + np.arange(1, m + 1)) * cfg.grid_step
            k0 += m
        else:
            new_nodes = tau + local.nodes[1:]
            on_grid = False
        if len(steps) == 1:
            derivs[0] = local.derivs[:1]
        nodes.append(new_nodes)
        values.append(local.values[1:])
        derivs.append(local.derivs[1:])
        tau = float(new_nodes[-1])
        traj = Trajectory(phi, np.concatenate(nodes), np.vstack(values), np.vstack(derivs))
    return SemiflowRun(phi, t, tau, traj, termination, steps, message)


def semiflow(f, phi, t, cfg=None):
    """Solve x' = f(x_t), x_0 = phi on [0, t]; ``run.state(t)`` is Sigma(t, phi)."""
    return march(f, phi, t, cfg)


def check_semigroup(f, phi, s, t, j, cfg=None):
    """``|Sigma(s, Sigma(t, phi)) - Sigma(s + t, phi)|_j``."""
    first = semiflow(f, phi, t, cfg).require()
    composed = semiflow(f, first.state(t), s, cfg).require()
    direct = semiflow(f, phi, s + t, cfg).require()
    return history_distance(composed.state(s), direct.state(s + t), j)


def check_uniqueness(f, phi, t, schedules, cfg=None):
    """Max node difference on [0, t] between runs with two step caps."""
    cfg = cfg or SolverConfig()
    a, b = (semiflow(f, phi, t, cfg.replace(max_step=S)).require() for S in schedules)
    xa = a.trajectory
    xb = b.trajectory
    return float(np.max(np.linalg.norm(xa.values - xb.evaluate(xa.nodes), axis=1)))
