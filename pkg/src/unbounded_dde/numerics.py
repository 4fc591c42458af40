"""Quadrature, tolerances and finite-difference directional derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AlignmentError, DomainError, InvariantError
from .history import CombinationHistory

EPS = np.finfo(float).eps


class QuadratureKind(str, Enum):
    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule; ``panels_per_unit`` fixes the panel count of an interval
    when a callable is integrated, and is checked against sample counts."""

    kind: QuadratureKind = QuadratureKind.TRAPEZOID
    panels_per_unit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", QuadratureKind(self.kind))
        if self.panels_per_unit is not None and self.panels_per_unit < 1:
            raise InvariantError("panel count must be >= 1")

    @property
    def order(self):
        return 2 if self.kind is QuadratureKind.TRAPEZOID else 4

    def panels(self, a, b):
        if self.panels_per_unit is None:
            raise InvariantError("rule has no panel density")
        m = max(1, int(round(self.panels_per_unit * abs(b - a))))
        if self.kind is QuadratureKind.SIMPSON and m % 2:
            m += 1
        return m


TRAPEZOID = QuadratureRule(QuadratureKind.TRAPEZOID)
SIMPSON = QuadratureRule(QuadratureKind.SIMPSON)


@dataclass(frozen=True)
class Tolerance:
    atol: float = 1e-12
    rtol: float = 0.0
    max_iters: int = 100

    def __post_init__(self):
        if not self.atol > 0:
            raise InvariantError("atol must be positive")
        if self.rtol < 0:
            raise InvariantError("rtol must be nonnegative")
        if self.max_iters < 1:
            raise InvariantError("max_iters must be positive")

    def threshold(self, scale):
        # never ask for less than round-off can deliver
        return max(self.atol + self.rtol * scale, 64 * EPS * max(1.0, scale))


def _samples(values):
    v = np.asarray(values, dtype=float)
    return v.reshape(-1, 1) if v.ndim == 1 else v


def integrate(values, a, b, rule=TRAPEZOID):
    """Signed integral over [a, b] of equally spaced samples.

    ``values[0]`` belongs to ``a`` and ``values[-1]`` to ``b``; for ``b < a``
    the orientation (and the sign) is reversed.  A 1-D input returns a
    scalar-shaped ``(1,)`` array.
    """
    v = _samples(values)
    m = len(v) - 1
    if a == b:
        return np.zeros(v.shape[1])
    if m < 1:
        raise AlignmentError("need at least two samples on a nondegenerate interval")
    if rule.panels_per_unit is not None and m != rule.panels(a, b):
        raise AlignmentError(f"{m} panels given, rule expects {rule.panels(a, b)} on [{a:g}, {b:g}]")
    h = (b - a) / m
    if rule.kind is QuadratureKind.TRAPEZOID:
        return h * (0.5 * (v[0] + v[-1]) + v[1:-1].sum(axis=0))
    if m % 2:
        raise AlignmentError("Simpson needs an even number of panels")
    return h / 3.0 * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum(axis=0) + 2.0 * v[2:-1:2].sum(axis=0))


def integrate_fn(g, a, b, rule):
    """Integrate a vectorized callable with the panel count fixed by ``rule``."""
    m = rule.panels(a, b)
    return integrate(g(np.linspace(a, b, m + 1)), a, b, rule)


def cumulative_integral(nodes, values, rule=TRAPEZOID):
    """Running integral from ``nodes[0]`` to every node.

    Trapezoid accepts any increasing nodes.  Simpson needs uniform spacing;
    odd end nodes are closed with a three-point partial panel.
    """
    t = np.asarray(nodes, dtype=float)
    v = _samples(values)
    out = np.zeros_like(v)
    if len(t) < 2:
        return out
    dt = np.diff(t)[:, None]
    if rule.kind is QuadratureKind.TRAPEZOID or len(t) < 3:
        out[1:] = np.cumsum(0.5 * dt * (v[:-1] + v[1:]), axis=0)
        return out
    h = dt[0, 0]
    if not np.allclose(dt, h, rtol=1e-9, atol=0.0):
        raise AlignmentError("Simpson cumulative integral needs uniform nodes")
    pairs = h / 3.0 * (v[0:-2:2] + 4.0 * v[1:-1:2] + v[2::2])
    out[2::2] = np.cumsum(pairs, axis=0)
    # odd nodes: previous even node plus a partial panel of the local quadratic
    m = len(t)
    for k in range(1, m, 2):
        if k + 1 < m:
            part = h / 12.0 * (5.0 * v[k - 1] + 8.0 * v[k] - v[k + 1])
        else:
            part = h / 12.0 * (-v[k - 2] + 8.0 * v[k - 1] + 5.0 * v[k])
        out[k] = out[k - 1] + part
    return out


def default_fd_step(phi, chi):
    scale = 1.0 + float(np.linalg.norm(phi.evaluate(0.0)))
    size = max(1.0, float(np.linalg.norm(chi.evaluate(0.0))))
    return EPS ** (1.0 / 3.0) * scale / size


def fd_directional(F, phi, chi, h=None, in_domain=None):
    """Central difference ``(F(phi + h chi) - F(phi - h chi)) / (2h)``."""
    if h is None:
        h = default_fd_step(phi, chi)
    plus = CombinationHistory([(1.0, phi), (h, chi)])
    minus = CombinationHistory([(1.0, phi), (-h, chi)])
    if in_domain is not None and not (in_domain(plus) and in_domain(minus)):
        raise DomainError("finite-difference probe left the domain")
    return (np.asarray(F(plus), dtype=float) - np.asarray(F(minus), dtype=float)) / (2.0 * h)
