import math

import numpy as np
import pytest

from unbounded_dde.errors import DomainError, RunFailedError
from unbounded_dde.history import HistoryFunction, Trajectory
from unbounded_dde.numerics import Tolerance
from unbounded_dde.picard import SolverConfig, fixed_point_defect
from unbounded_dde.problems import exponential, linear_const_delay, quadratic, state_dep_delay
from unbounded_dde.rhs import RhsAutonomous
from unbounded_dde.semiflow import Termination, check_semigroup, check_uniqueness, semiflow

ONE = HistoryFunction.constant(1.0)
ZERO_RHS = RhsAutonomous(1, lambda p: np.zeros(1), 1.0, dir_deriv=lambda p, c: np.zeros(1), name="zero")


def const_rhs(c):
    return RhsAutonomous(1, lambda p: np.array([c]), 1.0, dir_deriv=lambda p, c_: np.zeros(1), name="const")


def linear_delay_exact(t):
    """x' = -x(t-1), x = 1 on (-inf, 0]."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 1.0, 1.0 - t, 1.0 - t + (t - 1.0) ** 2 / 2)


class TestSemiflow:
    def test_zero_time_is_identity(self, cfg):
        phi = HistoryFunction.from_function(np.cos, 1.0, 0.01)
        run = semiflow(exponential().rhs, phi, 0.0, cfg)
        assert run.ok and run.reached_time == 0.0
        s = np.linspace(-3, 0, 31)
        assert np.array_equal(run.state(0.0).evaluate(s), phi.evaluate(s))

    def test_method_of_steps(self, cfg):
        run = semiflow(linear_const_delay().rhs, ONE, 2.0, cfg).require()
        x = run.trajectory
        assert abs(x.evaluate(1.0)[0]) <= 1e-6
        assert abs(x.evaluate(2.0)[0] + 0.5) <= 1e-6
        assert np.max(np.abs(x.values[:, 0] - linear_delay_exact(x.nodes))) <= 1e-6

    def test_exponential(self, cfg):
        run = semiflow(exponential().rhs, ONE, 1.0, cfg).require()
        assert abs(run.trajectory.evaluate(1.0)[0] - math.e) <= 1e-6

    def test_summary_fields(self, cfg):
        run = semiflow(exponential().rhs, ONE, 0.3, cfg)
        s = run.summary()
        assert set(s) == {"termination", "reached_time", "steps", "total_picard_iterations"}
        assert s["termination"] == "HorizonReached" and s["reached_time"] == pytest.approx(0.3)
        assert s["steps"] == len(run.steps) and s["total_picard_iterations"] >= s["steps"]

    def test_reached_time_is_sum_of_steps(self, cfg):
        run = semiflow(state_dep_delay().rhs, HistoryFunction.constant(0.5), 1.5, cfg)
        assert sum(s.plan.S for s in run.steps) == pytest.approx(run.reached_time, abs=1e-12)

    def test_nodes_on_grid(self, cfg):
        run = semiflow(linear_const_delay().rhs, ONE, 2.0, cfg)
        nodes = run.trajectory.nodes
        assert np.array_equal(nodes, np.arange(len(nodes)) * cfg.grid_step)

    def test_off_grid_horizon(self, cfg):
        run = semiflow(exponential().rhs, ONE, 0.12345, cfg).require()
        assert run.reached_time == pytest.approx(0.12345, abs=1e-12)

    def test_every_substep_is_a_fixed_point(self, cfg):
        f = state_dep_delay().rhs
        run = semiflow(f, HistoryFunction.constant(0.5), 1.0, cfg)
        x = run.trajectory
        for step in run.steps:
            lo = np.searchsorted(x.nodes, step.start - 1e-12)
            hi = np.searchsorted(x.nodes, step.start + step.plan.S + 1e-12)
            local = Trajectory(step.history, x.nodes[lo:hi] - x.nodes[lo], x.values[lo:hi], x.derivs[lo:hi])
            assert fixed_point_defect(f, local, step.history, cfg.rule, 0.0) <= 2 * cfg.tol.atol + 1e-13

    def test_negative_horizon(self, cfg):
        with pytest.raises(DomainError):
            semiflow(exponential().rhs, ONE, -1.0, cfg)

    def test_monotone_reach(self, cfg):
        f = state_dep_delay().rhs
        phi = HistoryFunction.constant(0.5)
        long = semiflow(f, phi, 1.0, cfg)
        short = semiflow(f, phi, 0.5, cfg)
        k = len(short.trajectory.nodes)
        # same schedule: each step is re-planned from the same segment
        same = all(a.plan.S == b.plan.S for a, b in zip(short.steps, long.steps))
        if same:
            assert np.array_equal(short.trajectory.values, long.trajectory.values[:k])
        else:
            shared = short.trajectory.nodes
            assert np.max(np.abs(long.trajectory.evaluate(shared) - short.trajectory.values)) <= 1e-6


class TestFailures:
    def test_blow_up(self, cfg):
        run = semiflow(quadratic().rhs, ONE, 1.5, cfg)
        assert run.termination is Termination.STEP_SELECTION_FAILED
        assert 0.8 <= run.reached_time < 1.0
        assert run.trajectory.horizon == pytest.approx(run.reached_time)
        with pytest.raises(RunFailedError):
            run.require()

    def test_domain_exit_keeps_partial(self, cfg):
        f = RhsAutonomous(1, lambda p: p.evaluate(0.0), 1.0, in_domain=lambda p: p.evaluate(0.0)[0] < 2.0, name="bounded")
        run = semiflow(f, ONE, 2.0, cfg)
        assert run.termination is Termination.DOMAIN_EXIT
        assert 0.0 < run.reached_time < math.log(2.0)
        assert run.trajectory.values[-1, 0] < 2.0

    def test_nonconvergence(self):
        cfg = SolverConfig(tol=Tolerance(atol=1e-15, max_iters=2))
        run = semiflow(exponential().rhs, ONE, 1.0, cfg)
        assert run.termination is Termination.NONCONVERGENCE
        assert run.reached_time == 0.0


class TestSemigroup:
    def test_zero_s(self, cfg):
        assert check_semigroup(linear_const_delay().rhs, ONE, 0.0, 0.7, 2, cfg) <= 1e-14

    def test_zero_rhs(self, cfg):
        assert check_semigroup(ZERO_RHS, ONE, 0.4, 0.9, 2, cfg) == 0.0

    def test_linear_delay(self, cfg):
        assert check_semigroup(linear_const_delay().rhs, ONE, 0.7, 0.7, 2, cfg) <= 1e-5

    def test_off_grid_split(self, cfg):
        assert check_semigroup(exponential().rhs, ONE, 0.31234, 0.45678, 2, cfg) <= 1e-5


class TestUniqueness:
    def test_identical_schedules(self, cfg):
        assert check_uniqueness(exponential().rhs, ONE, 1.0, (0.25, 0.25), cfg) == 0.0

    def test_constant_rhs(self, cfg):
        assert check_uniqueness(const_rhs(0.7), ONE, 1.0, (0.25, 0.1), cfg) <= 1e-12

    def test_exponential(self, cfg):
        assert check_uniqueness(exponential().rhs, ONE, 1.0, (0.2, 0.1), cfg) <= 1e-6
