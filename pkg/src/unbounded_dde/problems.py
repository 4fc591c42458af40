"""Built-in problems, addressable by name (``"pantograph(-1, 0, 0.5)"``).

Each entry builds a :class:`Problem` holding the right-hand side, a default
initial history and a default horizon.  Keyword and positional arguments
are accepted in the call syntax.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DDEError
from .history import HistoryFunction, odd_prolong, read_history_csv
from .rhs import RhsAutonomous, RhsNonautonomous
from .vide import VideProblem


class UnknownProblemError(DDEError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ProblemSpecError(DDEError, ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    """A named problem.  ``kind`` is ``"dde"``, ``"process"`` or ``"vide"``."""

    name: str
    kind: str
    rhs: object
    history: object
    horizon: float
    t0: float = 0.0
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# autonomous


def linear_const_delay(a=-1.0, tau=1.0):
    """``x'(t) = a x(t - tau)``, history 1."""
    a, tau = float(a), float(tau)
    f = RhsAutonomous(
        dim=1,
        eval=lambda phi: a * phi.evaluate(-tau),
        dir_deriv=lambda phi, chi: a * chi.evaluate(-tau),
        delay_horizon=tau,
        name=f"linear_const_delay({a:g},{tau:g})",
    )
    return Problem(f.name, "dde", f, HistoryFunction.constant(1.0, tau), 2.0, params={"a": a, "tau": tau})


def state_dep_delay(a=-1.0, c=1.0, d=1.0):
    """``x'(t) = a x(t - c x(t)^2)``; ``d`` is the declared delay window."""
    a, c, d = float(a), float(c), float(d)

    def lag(phi):
        x0 = phi.evaluate(0.0)
        return x0, c * float(x0[0]) ** 2

    def f_eval(phi):
        _, tau = lag(phi)
        return a * phi.evaluate(-tau)

    def f_deriv(phi, chi):
        x0, tau = lag(phi)
        dtau = 2.0 * c * float(x0[0]) * float(chi.evaluate(0.0)[0])
        return a * (chi.evaluate(-tau) - phi.derivative(-tau) * dtau)

    f = RhsAutonomous(1, f_eval, d, dir_deriv=f_deriv, name=f"state_dep_delay({a:g},{c:g},{d:g})")
    return Problem(f.name, "dde", f, HistoryFunction.constant(0.5, d), 2.0, params={"a": a, "c": c, "d": d})


def exponential(rate=1.0):
    """``x' = rate * x``, history 1."""
    rate = float(rate)
    f = RhsAutonomous(
        1,
        lambda phi: rate * phi.evaluate(0.0),
        1.0,
        dir_deriv=lambda phi, chi: rate * chi.evaluate(0.0),
        name=f"exponential({rate:g})",
    )
    return Problem(f.name, "dde", f, HistoryFunction.constant(1.0), 1.0, params={"rate": rate})


def quadratic():
    """``x' = x^2``, history 1; blows up at t = 1."""
    f = RhsAutonomous(
        1,
        lambda phi: phi.evaluate(0.0) ** 2,
        1.0,
        dir_deriv=lambda phi, chi: 2.0 * phi.evaluate(0.0) * chi.evaluate(0.0),
        name="quadratic",
    )
    return Problem(f.name, "dde", f, HistoryFunction.constant(1.0), 0.5)


# ---------------------------------------------------------------------------
# nonautonomous


def pantograph(a=-1.0, b=0.0, lam=0.5):
    """``x'(t) = a x(lam t) + b x(t)`` as ``g(t, phi) = a P_o phi((lam - 1) t) + b phi(0)``.

    The odd prolongation keeps ``g`` defined for negative clock values.
    """
    a, b, lam = float(a), float(b), float(lam)
    if not 0.0 < lam < 1.0:
        raise ProblemSpecError("pantograph needs 0 < lam < 1")
    k = lam - 1.0

    def g_eval(t, phi):
        return a * odd_prolong(phi, k * t) + b * phi.evaluate(0.0)

    def g_deriv(t, phi, dt, chi):
        s = k * t
        out = a * odd_prolong(chi, s) + b * chi.evaluate(0.0)
        if dt != 0.0:
            # d/ds of P_o phi at s is phi'(-|s|)
            out = out + a * k * dt * phi.derivative(-abs(s))
        return out

    g = RhsNonautonomous(1, g_eval, 1.0, dir_deriv=g_deriv, growing_delay=True, name=f"pantograph({a:g},{b:g},{lam:g})")
    return Problem(g.name, "process", g, HistoryFunction.constant(1.0), 2.0, params={"a": a, "b": b, "lam": lam})


def drift(rate=1.0):
    """``x'(t) = rate``."""
    rate = float(rate)
    g = RhsNonautonomous(
        1,
        lambda t, phi: np.array([rate]),
        1.0,
        dir_deriv=lambda t, phi, dt, chi: np.zeros(1),
        name=f"drift({rate:g})",
    )
    return Problem(g.name, "process", g, HistoryFunction.constant(0.0), 1.0, params={"rate": rate})


# ---------------------------------------------------------------------------
# Volterra integro-differential equations


_NONLINEARITIES = {
    "identity": (lambda x: x, lambda x: np.ones((len(x), 1, 1))),
    "sin": (np.sin, lambda x: np.cos(x).reshape(-1, 1, 1)),
    "zero": (np.zeros_like, lambda x: np.zeros((len(x), 1, 1))),
}


def vide(c=1.0, nonlinearity="identity", x0=1.0, horizon=2.0):
    """Scalar ``x'(t) = int_0^t c h(x(s)) ds`` with ``h`` from a small table."""
    c, x0 = float(c), float(x0)
    try:
        h, dh = _NONLINEARITIES[nonlinearity]
    except KeyError:
        raise ProblemSpecError(f"unknown nonlinearity {nonlinearity!r}; choose from {sorted(_NONLINEARITIES)}") from None
    name = f"vide({c:g},{nonlinearity},{x0:g})"
    p = VideProblem(
        dim=1,
        kernel=lambda t, s: np.full(np.shape(s), c),
        h=h,
        x0=np.array([x0]),
        dh=dh,
        kernel_dt=lambda t, s: np.zeros(np.shape(s)),
        name=name,
    )
    return Problem(name, "vide", p, p.initial_history(), float(horizon), params={"c": c, "nonlinearity": nonlinearity, "x0": x0})


def cosh():
    """``k = 1``, ``h = id``, ``x(0) = 1``: the solution is cosh."""
    return vide(1.0, "identity", 1.0, 2.0)


def cos():
    """``k = -1``, ``h = id``, ``x(0) = 1``: the solution is cos."""
    return vide(-1.0, "identity", 1.0, math.pi)


def vide_sine():
    """``k = 1``, ``h = sin``, ``x(0) = 1``."""
    return vide(1.0, "sin", 1.0, 1.0)


REGISTRY: dict[str, Callable[..., Problem]] = {
    "linear_const_delay": linear_const_delay,
    "state_dep_delay": state_dep_delay,
    "exponential": exponential,
    "quadratic": quadratic,
    "pantograph": pantograph,
    "drift": drift,
    "vide": vide,
    "cosh": cosh,
    "cos": cos,
    "vide_sine": vide_sine,
}


def _literal(node):
    if isinstance(node, ast.Name):
        return node.id
    return ast.literal_eval(node)


def parse_problem(spec):
    """Build a problem from ``"name"`` or ``"name(arg, key=value)"``."""
    spec = spec.strip()
    try:
        tree = ast.parse(spec, mode="eval").body
    except SyntaxError as exc:
        raise ProblemSpecError(f"cannot parse problem spec {spec!r}") from exc
    if isinstance(tree, ast.Name):
        name, args, kwargs = tree.id, [], {}
    elif isinstance(tree, ast.Call) and isinstance(tree.func, ast.Name):
        name = tree.func.id
        try:
            args = [_literal(a) for a in tree.args]
            kwargs = {k.arg: _literal(k.value) for k in tree.keywords}
        except ValueError as exc:
            raise ProblemSpecError(f"problem arguments must be literals: {spec!r}") from exc
    else:
        raise ProblemSpecError(f"cannot parse problem spec {spec!r}")
    if name not in REGISTRY:
        raise UnknownProblemError(f"unknown problem {name!r}; known: {', '.join(sorted(REGISTRY))}")
    try:
        return REGISTRY[name](*args, **kwargs)
    except TypeError as exc:
        raise ProblemSpecError(f"bad arguments for {name}: {exc}") from exc


def parse_history(spec, dim=1, depth=1.0):
    """History from ``"const:c"``, ``"linear:a,b"`` or ``"samples:path.csv"``.

    For ``dim > 1`` a single constant is broadcast to every component.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "const":
            c = np.broadcast_to(np.array([float(v) for v in arg.split(",")]), (dim,))
            return HistoryFunction.constant(c, depth)
        if kind == "linear":
            a, b = (float(v) for v in arg.split(","))
            return HistoryFunction.linear(np.full(dim, a), np.full(dim, b), depth)
        if kind == "samples":
            phi = read_history_csv(arg)
            if phi.dim != dim:
                raise ProblemSpecError(f"history file has dimension {phi.dim}, problem needs {dim}")
            return phi
    except ValueError as exc:
        raise ProblemSpecError(f"bad history spec {spec!r}: {exc}") from exc
    raise ProblemSpecError(f"unknown history spec {spec!r}; use const:c, linear:a,b or samples:path.csv")
