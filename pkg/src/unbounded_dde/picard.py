"""Fixed-point core: substitution, integration, the Picard map and step planning.

On [0, S] a solution with initial history ``phi`` is ``phi(0) + eta`` where
``eta`` (zero at 0) is a fixed point of

    eta -> integral_0^t f(concat(eta, phi)_s) ds.

``plan_step`` picks S so that this map is a contraction with factor at most
1/2 on a ball of radius ``eps`` around 0, using a probed local Lipschitz
bound.  ``solve_local`` then iterates from ``eta = 0``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainExitError, NonconvergenceError, StepSelectionError
from .history import CombinationHistory, ForwardPath, HistoryFunction, SegmentView, Trajectory, concat
from .numerics import TRAPEZOID, QuadratureRule, Tolerance, cumulative_integral

#: contraction factor required by the step planner
CONTRACTION_TARGET = 0.5


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every solver entry point.

    ``ball_radius`` is relative: the iterate ball has radius
    ``ball_radius * (1 + |phi(0)|)``.  ``max_step`` caps the planned step
    (used to force distinct step schedules).
    """

    grid_step: float = 1e-3
    rule: QuadratureRule = TRAPEZOID
    tol: Tolerance = field(default_factory=Tolerance)
    safety: float = 2.0
    ball_radius: float = 0.5
    n_probes: int = 6
    n_probe_points: int = 2
    s_min: float = 2.0**-20
    max_halvings: int = 20
    max_step: float | None = None
    seed: int = 0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class StepPlan:
    S: float
    lipschitz_est: float
    eps: float
    contraction_bound: float
    nodes: np.ndarray = field(repr=False)
    on_grid: bool = True
    probe_norm: float = 0.0
    smallness: float = 0.0


@dataclass
class PicardReport:
    iterations: int = 0
    residual: float = math.inf
    ratios: list = field(default_factory=list)
    converged: bool = False

    def to_dict(self):
        return {"iterations": int(self.iterations), "residual": float(self.residual), "ratios": [float(r) for r in self.ratios]}


# ---------------------------------------------------------------------------
# operators


def substitute(f, xi, t0=0.0):
    """The path ``t -> f(xi_t)`` at the forward nodes of ``xi``.

    ``t0`` is the time offset handed to time-dependent fields.
    """
    vals = np.empty((len(xi.nodes), f.dim))
    for k, t in enumerate(xi.nodes):
        seg = SegmentView(xi, t)
        if not f.domain_at(t0 + t, seg):
            raise DomainExitError(f"segment left the domain at t={t0 + t:.6g}", time=t0 + t)
        v = f.evaluate_at(t0 + t, seg)
        if not np.all(np.isfinite(v)):
            raise DomainExitError(f"non-finite right-hand side at t={t0 + t:.6g}", time=t0 + t)
        vals[k] = v
    return ForwardPath(xi.nodes, vals)


def integrate_path(psi, rule=TRAPEZOID):
    """Running integral of ``psi`` from 0; carries ``psi`` as derivative samples."""
    return ForwardPath(psi.nodes, cumulative_integral(psi.nodes, psi.values, rule), psi.values, zero_at_origin=True)


def picard_map(f, eta, phi, rule=TRAPEZOID, t0=0.0):
    return integrate_path(substitute(f, concat(eta, phi), t0), rule)


# ---------------------------------------------------------------------------
# step planning


def step_grid(S, grid_step, exact=False):
    """Nodes on [0, S'] for a requested step ``S``.

    Steps are snapped down to a multiple of ``grid_step``; with ``exact`` the
    length is kept and the panels shrink to fit.  Steps shorter than one
    grid cell use a single panel.  Returns ``(nodes, on_grid)``.
    """
    ratio = S / grid_step
    if exact:
        m = int(round(ratio))
        if m >= 1 and abs(ratio - m) <= 1e-9 * max(1.0, ratio):
            return grid_step * np.arange(m + 1), True
        if ratio >= 1.0:
            m = int(math.ceil(ratio - 1e-9))
            return np.linspace(0.0, S, m + 1), False
        return np.array([0.0, S]), False
    m = int(math.floor(ratio + 1e-9))
    if m >= 1:
        return grid_step * np.arange(m + 1), True
    return np.array([0.0, S]), False


def window_depth(f, t0):
    return f.delay_horizon + (t0 if getattr(f, "growing_delay", False) else 0.0)


def probe_directions(dim, depth, rng, n_random, knots=9):
    """Unit constant directions plus random piecewise-linear ones, all of sup-norm 1."""
    dirs = [HistoryFunction.constant(np.eye(dim)[i], depth) for i in range(dim)]
    grid = np.linspace(-depth, 0.0, knots)
    for _ in range(n_random):
        v = rng.uniform(-1.0, 1.0, size=(knots, dim))
        v /= np.max(np.linalg.norm(v, axis=1))
        dirs.append(HistoryFunction(grid, v))
    return dirs


def estimate_lipschitz(f, phi, cfg, radius, t0=0.0):
    """Max of ``|Df(p) chi|`` over probe directions ``chi`` and probe points ``p``.

    Probe points are ``phi`` and ``phi + radius * r`` for random ``r`` of
    sup-norm 1; the estimate is a heuristic, not a certified bound.
    """
    rng = np.random.default_rng(cfg.seed)
    depth = window_depth(f, t0)
    dirs = probe_directions(phi.dim, depth, rng, cfg.n_probes)
    shifts = probe_directions(phi.dim, depth, rng, cfg.n_probe_points)[phi.dim:]
    points = [phi] + [CombinationHistory([(1.0, phi), (radius, r)]) for r in shifts]
    best = 0.0
    for p in points:
        if not f.domain_at(t0, p):
            continue
        for chi in dirs:
            best = max(best, float(np.linalg.norm(f.derivative_at(t0, p, chi))))
    return best


def plan_step(f, phi, cfg=None, t0=0.0, max_step=None):
    """Choose a step S with ``L*S <= 1/2`` and ``|B_S(0, phi)| < eps/8``.

    ``L`` is the probed Lipschitz estimate times ``cfg.safety``.  The search
    starts at ``min(delay_horizon, 1)`` (capped by ``max_step``) and halves.
    """
    cfg = cfg or SolverConfig()
    if not f.domain_at(t0, phi):
        raise DomainExitError(f"initial history outside the domain at t={t0:.6g}", time=t0)
    eps = cfg.ball_radius * (1.0 + float(np.linalg.norm(phi.evaluate(0.0))))
    # iterates stay in the eps/2 ball, so probe there
    probe = estimate_lipschitz(f, phi, cfg, 0.5 * eps, t0)
    L = cfg.safety * probe
    cap = math.inf if max_step is None else max_step
    if cfg.max_step is not None:
        cap = min(cap, cfg.max_step)
    S = min(f.delay_horizon, 1.0)
    exact = False
    if cap <= S:
        S, exact = cap, max_step is not None and cap == max_step
    last = S
    for _ in range(cfg.max_halvings + 1):
        if S < cfg.s_min:
            break
        nodes, on_grid = step_grid(S, cfg.grid_step, exact)
        S_eff = float(nodes[-1])
        last = S_eff
        if L * S_eff <= CONTRACTION_TARGET:
            b0 = picard_map(f, ForwardPath.zeros(nodes, phi.dim), phi, cfg.rule, t0)
            small = b0.sup()
            if small < eps / 8.0:
                return StepPlan(S_eff, L, eps, L * S_eff, nodes, on_grid, probe, small)
        S *= 0.5
        exact = False
    raise StepSelectionError(
        f"no admissible step >= {cfg.s_min:g} at t={t0:.6g} (Lipschitz estimate {L:.3g}); probable blow-up or stiffness",
        last_step=last,
    )


# ---------------------------------------------------------------------------
# local solve


def solve_local(f, phi, plan, cfg=None, t0=0.0):
    """Picard iteration from ``eta = 0`` on the plan's grid.

    Returns the trajectory on (-inf, S] (relative time) with derivative
    samples ``f(x_t)``, and the iteration report.
    """
    cfg = cfg or SolverConfig()
    tol = cfg.tol
    report = PicardReport()
    eta = ForwardPath.zeros(plan.nodes, phi.dim)
    v0 = phi.evaluate(0.0)
    prev = None
    for it in range(1, tol.max_iters + 1):
        new = picard_map(f, eta, phi, cfg.rule, t0)
        res = float(np.max(np.linalg.norm(new.values - eta.values, axis=1)))
        if prev is not None and prev > 0:
            report.ratios.append(res / prev)
        prev = res
        eta = new
        report.iterations = it
        report.residual = res
        scale = float(np.max(np.linalg.norm(v0 + eta.values, axis=1)))
        if res <= tol.threshold(scale):
            report.converged = True
            break
    else:
        raise NonconvergenceError(
            f"Picard iteration did not converge in {tol.max_iters} sweeps at t={t0:.6g} (residual {report.residual:.3g})",
            report=report,
        )
    x = concat(eta, phi)
    F = substitute(f, x, t0)
    return Trajectory(phi, x.nodes, x.values, F.values), report


def contraction_ratios(f, phi, plan, n_pairs=20, rng=None, cfg=None, t0=0.0):
    """Measured ``|B(a) - B(b)| / |a - b|`` for random pairs in the ``eps/2`` ball."""
    cfg = cfg or SolverConfig()
    rng = np.random.default_rng(0) if rng is None else rng
    nodes = plan.nodes
    r = plan.eps / 2.0

    def sample():
        v = rng.uniform(-1.0, 1.0, size=(len(nodes), phi.dim))
        v[0] = 0.0
        peak = np.max(np.linalg.norm(v, axis=1))
        v *= r * rng.uniform(0.1, 1.0) / peak if peak > 0 else 0.0
        return ForwardPath(nodes, v, zero_at_origin=True)

    out = []
    for _ in range(n_pairs):
        a, b = sample(), sample()
        gap = float(np.max(np.linalg.norm(a.values - b.values, axis=1)))
        if gap == 0.0:
            continue
        ba = picard_map(f, a, phi, cfg.rule, t0)
        bb = picard_map(f, b, phi, cfg.rule, t0)
        out.append(float(np.max(np.linalg.norm(ba.values - bb.values, axis=1))) / gap)
    return out


def fixed_point_defect(f, x, phi, rule=TRAPEZOID, t0=0.0):
    """``max_t |x(t) - phi(0) - int_0^t f(x_s) ds|`` over the forward nodes of ``x``."""
    F = substitute(f, x, t0)
    integral = cumulative_integral(x.nodes, F.values, rule)
    return float(np.max(np.linalg.norm(x.values - phi.evaluate(0.0) - integral, axis=1)))
