"""Variational equation along a computed solution.

For a base run ``x = x^phi`` and a direction ``phi_hat`` the variational
solution ``v`` satisfies ``v'(u) = Df(x_u) v_u`` with ``v_0 = phi_hat``; its
segments ``v_t`` are the directional derivatives of the solution operators
``phi -> x^phi_t``.  ``fd_solution_derivative`` is the independent
finite-difference oracle over re-solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonError
from .history import CombinationHistory, ForwardPath, History, Trajectory
from .numerics import Tolerance
from .picard import SolverConfig
from .rhs import eval_df
from .semiflow import SemiflowRun, march, semiflow


class VariationalField:
    """The linear time-dependent field ``(u, w) -> Df(x_u) w`` along a base trajectory."""

    def __init__(self, f, base_traj):
        self.f = f
        self.base = base_traj
        self.dim = f.dim
        self.delay_horizon = f.delay_horizon
        self.growing_delay = getattr(f, "growing_delay", False)

    def evaluate_at(self, u, w):
        return eval_df(self.f, self.base.segment(u), w)

    def derivative_at(self, u, w, chi):
        return self.evaluate_at(u, chi)

    def domain_at(self, u, w):
        return True


@dataclass
class VariationalRun:
    base: SemiflowRun
    direction: History
    trajectory: Trajectory
    run: SemiflowRun

    def state(self, t):
        return self.trajectory.segment(t)


def solve_variational(f, base, direction, t, cfg=None):
    """Solve the variational equation on [0, t] along ``base``."""
    cfg = cfg or SolverConfig()
    if base.reached_time < t - 1e-9 * max(1.0, t):
        raise HorizonError(f"base run reaches {base.reached_time:g} < {t:g}")
    run = march(VariationalField(f, base.trajectory), direction, t, cfg).require()
    return VariationalRun(base, direction, run.trajectory, run)


def oracle_config(cfg=None):
    """Solver settings for difference quotients: Picard iterated to round-off."""
    cfg = cfg or SolverConfig()
    return cfg.replace(tol=Tolerance(atol=1e-16, rtol=0.0, max_iters=max(cfg.tol.max_iters, 200)))


def fd_solution_derivative(f, phi, direction, t, h, cfg=None):
    """``(x^{phi + h d}(u) - x^{phi - h d}(u)) / 2h`` at the forward nodes on [0, t]."""
    cfg = oracle_config(cfg)
    plus = semiflow(f, CombinationHistory([(1.0, phi), (h, direction)]), t, cfg).require()
    minus = semiflow(f, CombinationHistory([(1.0, phi), (-h, direction)]), t, cfg).require()
    nodes = plus.trajectory.nodes
    diff = (plus.trajectory.values - minus.trajectory.evaluate(nodes)) / (2.0 * h)
    return ForwardPath(nodes, diff)


def oracle_distance(var_run, fd_path):
    """Sup over shared forward nodes of ``|v(u) - fd(u)|``."""
    v = var_run.trajectory.evaluate(fd_path.nodes)
    return float(np.max(np.linalg.norm(v - fd_path.values, axis=1)))
