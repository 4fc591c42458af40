import math

import numpy as np
import pytest

from unbounded_dde.history import HistoryFunction, odd_prolong
from unbounded_dde.numerics import TRAPEZOID, integrate
from unbounded_dde.picard import SolverConfig
from unbounded_dde.problems import cos, cosh, vide, vide_sine
from unbounded_dde.process import clock_defect
from unbounded_dde.vide import (
    VideProblem,
    _signed_integral,
    integration_operator,
    integration_operator_derivative,
    panel_count,
    route_distance,
    shifted_kernel,
    solve_vide,
    substitute_h,
    substitute_h_derivative,
    vide_g,
    vide_g_derivative,
    volterra_direct,
)

COSH = cosh().rhs
COS = cos().rhs
SINE = vide_sine().rhs
FLAT = vide(1.0, "zero", 1.5).rhs


def scalar_problem(kernel, h=lambda x: x, dh=None):
    return VideProblem(1, kernel, h, np.array([1.0]), dh=dh)


def smooth_history(depth=4.0):
    return HistoryFunction.from_function(lambda s: 1 + 0.5 * np.sin(s), depth, 1e-3, deriv=lambda s: 0.5 * np.cos(s))


@pytest.fixture(scope="module")
def cosh_run():
    return solve_vide(COSH, 2.0, SolverConfig())


class TestShiftedKernel:
    def test_constant(self):
        assert shifted_kernel(COSH, 1.3, -0.4)[0, 0] == 1.0

    def test_exponential_kernel(self):
        p = scalar_problem(lambda t, s: np.exp(t - s))
        s = np.linspace(-2, 0, 5)
        assert np.allclose(shifted_kernel(p, 0.8, s)[:, 0, 0], np.exp(-s))

    def test_product_kernel(self):
        p = scalar_problem(lambda t, s: t * s)
        assert shifted_kernel(p, 2.0, -0.5)[0, 0] == pytest.approx(3.0)

    def test_matrix_kernel(self):
        p = VideProblem(2, lambda t, s: np.array([[1.0, t], [0.0, 2.0]]), lambda x: x, np.zeros(2))
        K = shifted_kernel(p, 3.0, np.array([-1.0, 0.0]))
        assert K.shape == (2, 2, 2) and K[1, 0, 1] == 3.0


class TestSubstituteH:
    def test_identity(self):
        psi = np.linspace(0, 1, 11)
        assert np.array_equal(substitute_h(COSH, psi)[:, 0], psi)

    def test_square_and_derivative(self):
        p = scalar_problem(lambda t, s: 1.0, h=lambda x: x**2, dh=lambda x: (2 * x).reshape(-1, 1, 1))
        t = np.linspace(0, 1, 11)
        assert np.allclose(substitute_h(p, t)[:, 0], t**2)
        exact = substitute_h_derivative(p, t, np.ones_like(t))[:, 0]
        assert np.allclose(exact, 2 * t)
        p_fd = scalar_problem(lambda t, s: 1.0, h=lambda x: x**2)
        assert np.allclose(substitute_h_derivative(p_fd, t, np.ones_like(t))[:, 0], 2 * t, atol=1e-8)

    def test_constant(self):
        assert np.allclose(substitute_h(SINE, np.full(4, 0.3))[:, 0], math.sin(0.3))

    def test_derivative_second_order(self):
        x = np.linspace(-1, 1, 9)
        chi = np.cos(x)
        exact = substitute_h_derivative(SINE, x, chi)[:, 0]
        errs = []
        for h in (1e-2, 5e-3):
            fd = (substitute_h(SINE, x + h * chi) - substitute_h(SINE, x - h * chi))[:, 0] / (2 * h)
            errs.append(np.max(np.abs(fd - exact)))
        assert 3.5 <= errs[0] / errs[1] <= 4.5


class TestVideG:
    def test_constant_history(self):
        assert vide_g(COSH, 2.0, HistoryFunction.constant(1.0), 1e-3)[0] == pytest.approx(2.0)

    def test_zero_time(self):
        assert vide_g(COSH, 0.0, HistoryFunction.constant(1.0), 1e-3)[0] == 0.0

    def test_identity_history(self):
        assert vide_g(COSH, 1.0, HistoryFunction.linear(0.0, 1.0), 1e-3)[0] == pytest.approx(-0.5, abs=1e-12)

    def test_ignores_history_before_window(self):
        nodes = np.linspace(-3, 0, 301)
        a = HistoryFunction(nodes, np.cos(nodes)[:, None])
        altered = np.cos(nodes)
        altered[nodes < -1.2] += 7.0
        b = HistoryFunction(nodes, altered[:, None])
        assert vide_g(SINE, 1.0, a, 1e-2)[0] == vide_g(SINE, 1.0, b, 1e-2)[0]

    @pytest.mark.parametrize("t", [-0.3, -1.0, -1.7])
    def test_negative_time_uses_prolongation(self, t):
        phi = HistoryFunction.from_function(np.cos, 3.0, 1e-4, deriv=lambda s: -np.sin(s))
        step = 1e-3
        m = panel_count(t, step)
        s = np.linspace(0.0, -t, m + 1)
        # closed form of the prolonged history on s > 0
        integrand = np.sin(2.0 - np.cos(s))
        expected = -integrate(integrand, 0.0, -t, TRAPEZOID)[0]
        assert vide_g(SINE, t, phi, step)[0] == pytest.approx(expected, abs=1e-9)
        assert np.allclose(odd_prolong(phi, s)[:, 0], 2.0 - np.cos(s), atol=1e-12)

    @pytest.mark.parametrize("t", [0.9, -0.6])
    def test_derivative_matches_fd(self, t):
        phi = smooth_history()
        chi = HistoryFunction.from_function(np.cos, 4.0, 1e-3, deriv=lambda s: -np.sin(s))
        step = 1e-3
        exact = vide_g_derivative(SINE, t, phi, 0.4, chi, step)
        h = 1e-5
        m = panel_count(t, step)
        # FD at a frozen panel count so the quadrature grid does not jump
        fd = (_signed_integral(SINE, t + 0.4 * h, phi + h * chi, m) - _signed_integral(SINE, t - 0.4 * h, phi - h * chi, m)) / (2 * h)
        assert np.allclose(exact, fd, atol=1e-7)


class TestSolveVide:
    def test_cosh(self, cosh_run):
        assert cosh_run.ok
        t, x, _ = cosh_run.path()
        assert abs(x[-1, 0] - math.cosh(2.0)) <= 1e-5
        assert np.max(np.abs(x[:, 0] - np.cosh(t))) <= 1e-5

    def test_clock(self, cosh_run):
        assert clock_defect(cosh_run) <= 1e-12

    def test_flat(self):
        prun = solve_vide(FLAT, 1.0, SolverConfig(grid_step=4e-3))
        _, x, _ = prun.path()
        assert np.all(x == 1.5)

    def test_cos(self):
        prun = solve_vide(COS, math.pi, SolverConfig())
        assert abs(prun.state(math.pi).evaluate(0.0)[0] + 1.0) <= 1e-5

    def test_history_before_zero_is_irrelevant(self):
        cfg = SolverConfig(grid_step=4e-3)
        a = solve_vide(SINE, 1.0, cfg)
        wiggle = HistoryFunction.from_function(lambda s: 1.0 + np.sin(5 * s), 1.0, 1e-3, deriv=lambda s: 5 * np.cos(5 * s))
        b = solve_vide(SINE, 1.0, cfg, wiggle)
        xa, xb = a.path()[1], b.run.trajectory.evaluate(a.path()[0])[:, 1:]
        assert np.max(np.abs(xa - xb)) <= 1e-12


class TestVolterraDirect:
    def test_cosh_second_order(self):
        errs = []
        for step in (4e-3, 2e-3):
            t, x = volterra_direct(COSH, 2.0, step)
            errs.append(np.max(np.abs(x[:, 0] - np.cosh(t))))
        assert 3.5 <= errs[0] / errs[1] <= 4.5

    def test_cos_second_order(self):
        errs = []
        for step in (4e-3, 2e-3):
            t, x = volterra_direct(COS, math.pi, step)
            errs.append(np.max(np.abs(x[:, 0] - np.cos(t))))
        assert 3.5 <= errs[0] / errs[1] <= 4.5

    def test_flat(self):
        _, x = volterra_direct(FLAT, 1.0, 1e-2)
        assert np.all(x == 1.5)


class TestRouteEquivalence:
    @pytest.mark.parametrize("problem,T", [(COSH, 1.0), (COS, 1.0), (SINE, 1.0)], ids=["cosh", "cos", "sine"])
    def test_routes_agree(self, problem, T):
        for step in (4e-3, 2e-3):
            prun = solve_vide(problem, T, SolverConfig(grid_step=step))
            nodes, values = volterra_direct(problem, T, step)
            assert route_distance(prun, nodes, values) <= step**2


class TestIntegrationOperator:
    def test_boundary_term_is_at_lower_limit(self):
        p = scalar_problem(lambda t, s: np.exp(0.3 * t - s) + t * s)
        psi = lambda s: np.sin(s) + 2.0  # noqa: E731
        step = 1e-4
        for u in (0.7, 1.3):
            d = 1e-4
            fd = (integration_operator(p, psi, u + d, step) - integration_operator(p, psi, u - d, step)) / (2 * d)
            leibniz = integration_operator_derivative(p, psi, u, step)
            assert np.allclose(leibniz, fd, atol=1e-5)
            # putting the boundary term at s = u with a minus sign gives a different value
            inner = leibniz - shifted_kernel(p, u, -u) @ np.atleast_1d(psi(-u))
            other = inner - shifted_kernel(p, u, u) @ np.atleast_1d(psi(u))
            assert not np.allclose(other, fd, atol=1e-2)

    def test_value(self):
        assert integration_operator(COSH, np.cos, 1.0, 1e-3)[0] == pytest.approx(math.sin(1.0), abs=1e-6)
