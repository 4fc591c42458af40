"""Right-hand side descriptors for x'(t) = f(x_t) and x'(t) = g(t, x_t).

Solvers talk to right-hand sides through three methods, so that
time-dependent fields (the variational equation) plug into the same
machinery::

    evaluate_at(t, hist)         -> R^n
    derivative_at(t, hist, dir)  -> R^n
    domain_at(t, hist)           -> bool
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InvariantError
from .numerics import fd_directional


def _always(*_args):
    return True


def _describe(phi):
    v0 = np.asarray(phi.evaluate(0.0))
    return f"phi(0)={np.array2string(v0, precision=6)}"


@dataclass(frozen=True)
class RhsAutonomous:
    """A functional ``f`` on histories.

    ``delay_horizon`` is the declared window [-d, 0] that ``f`` reads near
    the states of interest.  ``growing_delay`` marks problems whose window
    grows with elapsed time (segments then keep the full past).
    """

    dim: int
    eval: Callable
    delay_horizon: float
    dir_deriv: Callable | None = None
    in_domain: Callable = _always
    growing_delay: bool = False
    name: str = "f"

    def __post_init__(self):
        if self.dim < 1:
            raise InvariantError("dimension must be positive")
        if not self.delay_horizon > 0:
            raise InvariantError("delay horizon must be positive")

    def __call__(self, phi):
        return eval_f(self, phi)

    def evaluate_at(self, t, phi):
        return np.asarray(self.eval(phi), dtype=float).reshape(self.dim)

    def derivative_at(self, t, phi, chi):
        return eval_df(self, phi, chi)

    def domain_at(self, t, phi):
        return bool(self.in_domain(phi))


@dataclass(frozen=True)
class RhsNonautonomous:
    """A map ``g(t, phi)``.

    ``dir_deriv(t, phi, dt, chi)`` is the derivative in the direction
    ``(dt, chi)``; without it finite differences are used.
    """

    dim: int
    eval: Callable
    delay_horizon: float
    dir_deriv: Callable | None = None
    in_domain: Callable = _always
    growing_delay: bool = False
    name: str = "g"

    def __post_init__(self):
        if self.dim < 1:
            raise InvariantError("dimension must be positive")
        if not self.delay_horizon > 0:
            raise InvariantError("delay horizon must be positive")

    def __call__(self, t, phi):
        return eval_g(self, t, phi)


def eval_f(f, phi):
    if not f.in_domain(phi):
        raise DomainError(f"{f.name}: history outside the domain ({_describe(phi)})")
    out = np.asarray(f.eval(phi), dtype=float).reshape(f.dim)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{f.name}: non-finite value ({_describe(phi)})")
    return out


def eval_df(f, phi, chi, h=None):
    """``Df(phi) chi``: exact when the descriptor supplies it, else central FD."""
    if not f.in_domain(phi):
        raise DomainError(f"{f.name}: history outside the domain ({_describe(phi)})")
    if f.dir_deriv is not None:
        return np.asarray(f.dir_deriv(phi, chi), dtype=float).reshape(f.dim)
    return np.asarray(fd_directional(f.eval, phi, chi, h, in_domain=f.in_domain), dtype=float).reshape(f.dim)


def eval_g(g, t, phi):
    if not g.in_domain(t, phi):
        raise DomainError(f"{g.name}: (t={t:g}, {_describe(phi)}) outside the domain")
    out = np.asarray(g.eval(t, phi), dtype=float).reshape(g.dim)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{g.name}: non-finite value at t={t:g}")
    return out


def eval_dg(g, t, phi, dt, chi, h=None):
    """Derivative of ``g`` at ``(t, phi)`` in the direction ``(dt, chi)``."""
    if g.dir_deriv is not None:
        return np.asarray(g.dir_deriv(t, phi, dt, chi), dtype=float).reshape(g.dim)
    if h is None:
        h = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + abs(t) + float(np.linalg.norm(phi.evaluate(0.0))))
    plus = np.asarray(g.eval(t + h * dt, phi + h * chi), dtype=float)
    minus = np.asarray(g.eval(t - h * dt, phi - h * chi), dtype=float)
    return (plus - minus).reshape(g.dim) / (2.0 * h)
