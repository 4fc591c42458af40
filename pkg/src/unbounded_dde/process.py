"""Nonautonomous equations x'(t) = g(t, x_t) through clock augmentation.

The augmented state is ``(r, z)`` with ``r' = 1`` and ``z' = g(r(t), z_t)``;
starting from the clock history ``u -> t0 + u`` and ``z_0 = phi`` the
projection ``z`` solves the nonautonomous problem shifted by ``t0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RunFailedError
from .history import HistoryFunction, ProjectedHistory, StackedHistory, Trajectory, history_distance
from .picard import SolverConfig
from .rhs import RhsAutonomous, eval_dg
from .semiflow import SemiflowRun, semiflow


class ProcessError(RunFailedError):
    def __init__(self, message, run=None, clock_time=None):
        super().__init__(message, run)
        self.clock_time = clock_time


def clock_history(t0, depth=1.0):
    """The scalar history ``u -> t0 + u``, exact on all of (-inf, 0]."""
    return HistoryFunction.linear(t0, 1.0, depth)


def _state_part(psi):
    return ProjectedHistory(psi, slice(1, None))


@dataclass(frozen=True)
class AugmentedRhs:
    inner: object
    rhs: RhsAutonomous

    def __call__(self, psi):
        return self.rhs(psi)


def augment(g):
    """Build ``f_g(psi) = (1, g(psi_1(0), p_n psi))`` on histories in R^{n+1}."""
    n = g.dim

    def f_eval(psi):
        t = float(psi.evaluate(0.0)[0])
        return np.concatenate([[1.0], np.asarray(g.eval(t, _state_part(psi)), dtype=float).reshape(n)])

    def f_deriv(psi, chi):
        t = float(psi.evaluate(0.0)[0])
        dt = float(chi.evaluate(0.0)[0])
        return np.concatenate([[0.0], eval_dg(g, t, _state_part(psi), dt, _state_part(chi))])

    def f_domain(psi):
        return bool(g.in_domain(float(psi.evaluate(0.0)[0]), _state_part(psi)))

    rhs = RhsAutonomous(
        dim=n + 1,
        eval=f_eval,
        delay_horizon=g.delay_horizon,
        dir_deriv=f_deriv,
        in_domain=f_domain,
        growing_delay=g.growing_delay,
        name=f"augmented[{g.name}]",
    )
    return AugmentedRhs(g, rhs)


@dataclass
class ProcessRun:
    """An augmented semiflow run started at clock time ``t0``."""

    run: SemiflowRun
    t0: float

    @property
    def ok(self):
        return self.run.ok

    @property
    def reached_clock(self):
        return self.t0 + self.run.reached_time

    def state(self, t):
        """``P(t, t0, phi)``: the state segment at clock time ``t``."""
        return _state_part(self.run.trajectory.segment(t - self.t0))

    def clock(self):
        traj = self.run.trajectory
        return traj.nodes, traj.values[:, 0]

    def path(self):
        """``(times, values, derivs)`` of the state on [t0, reached] in clock time."""
        traj = self.run.trajectory
        return self.t0 + traj.nodes, traj.values[:, 1:], traj.derivs[:, 1:]

    def rows(self):
        """CSV rows for the state: history window then forward nodes, in clock time."""
        times, values, derivs = self.run.trajectory.rows()
        return self.t0 + times, values[:, 1:], None if derivs is None else derivs[:, 1:]


def solve_process(g, t, t0, phi, cfg=None):
    if t < t0:
        raise ValueError("process needs t0 <= t")
    aug = augment(g)
    start = StackedHistory([clock_history(t0, max(phi.depth, 1.0)), phi])
    return ProcessRun(semiflow(aug.rhs, start, t - t0, cfg), float(t0))


def process(g, t, t0, phi, cfg=None):
    """``P(t, t0, phi)`` as a history; raises :class:`ProcessError` on early termination."""
    prun = solve_process(g, t, t0, phi, cfg)
    if not prun.ok:
        raise ProcessError(
            f"process stopped at clock time {prun.reached_clock:.6g}: {prun.run.termination.value}",
            run=prun.run,
            clock_time=prun.reached_clock,
        )
    return prun.state(t)


def check_cocycle(g, s, t, t0, phi, j, cfg=None):
    """``|P(s, t0, phi) - P(s, t, P(t, t0, phi))|_j``."""
    cfg = cfg or SolverConfig()
    direct = process(g, s, t0, phi, cfg)
    inner = process(g, t, t0, phi, cfg)
    composed = process(g, s, t, inner, cfg)
    return history_distance(direct, composed, j)


def clock_defect(prun):
    """``max_u |r(u) - (u + t0)|`` over the forward nodes."""
    nodes, r = prun.clock()
    return float(np.max(np.abs(r - (nodes + prun.t0))))
