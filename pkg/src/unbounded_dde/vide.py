"""Volterra integro-differential equations x'(t) = int_0^t k(t,s) h(x(s)) ds.

With ``K(t, s) = k(t, t + s)`` the right-hand side becomes a functional of
the segment ``x_t``, read through the odd prolongation so that it is
defined for every real ``t``::

    g(t, phi) = int_{-t}^0 K(t, s) h((P_o phi)(s)) ds.

``solve_vide`` runs this ``g`` through the process machinery (a delay that
grows like the elapsed time); ``volterra_direct`` is an independent
product-trapezoid marching scheme used as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .history import HistoryFunction, odd_prolong
from .numerics import EPS
from .picard import SolverConfig
from .process import solve_process
from .rhs import RhsNonautonomous


@dataclass(frozen=True)
class VideProblem:
    """Kernel ``k(t, s)`` (vectorized in ``s``), nonlinearity ``h`` and the initial value.

    ``h`` maps an ``(m, n)`` array row-wise; ``dh`` returns the ``(m, n, n)``
    Jacobians.  Kernels may return a scalar, an ``(m,)`` array (n = 1), an
    ``(n, n)`` matrix or an ``(m, n, n)`` stack.
    """

    dim: int
    kernel: Callable
    h: Callable
    x0: np.ndarray
    dh: Callable | None = None
    kernel_dt: Callable | None = None
    name: str = "vide"

    def initial_history(self, depth=1.0):
        return HistoryFunction.constant(self.x0, depth)


def _kernel_stack(p, t, s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    m, n = s.size, p.dim
    K = np.asarray(p.kernel(t, s), dtype=float)
    if K.ndim == 0:
        K = np.full((m, 1, 1), float(K))
    elif K.shape == (m,) and n == 1:
        K = K.reshape(m, 1, 1)
    elif K.shape == (n, n):
        K = K[None, :, :]
    return np.broadcast_to(K, (m, n, n))


def _h_rows(p, x):
    out = np.asarray(p.h(x), dtype=float)
    return out.reshape(x.shape)


def shifted_kernel(p, t, s):
    """``K(t, s) = k(t, t + s)``; an ``n x n`` matrix for scalar ``s``."""
    scalar = np.ndim(s) == 0
    K = _kernel_stack(p, t, t + np.atleast_1d(np.asarray(s, dtype=float)))
    return K[0] if scalar else K


def substitute_h(p, values):
    """Pointwise ``h`` applied to samples of shape ``(m, n)``."""
    x = np.asarray(values, dtype=float).reshape(-1, p.dim)
    return _h_rows(p, x)


def substitute_h_derivative(p, values, direction):
    """``t -> Dh(psi(t)) chi(t)`` on samples; finite differences without ``dh``."""
    x = np.asarray(values, dtype=float).reshape(-1, p.dim)
    c = np.asarray(direction, dtype=float).reshape(-1, p.dim)
    if p.dh is not None:
        J = np.asarray(p.dh(x), dtype=float).reshape(-1, p.dim, p.dim)
        return np.einsum("mij,mj->mi", J, c)
    step = EPS ** (1.0 / 3.0) * (1.0 + np.abs(x).max())
    return (_h_rows(p, x + step * c) - _h_rows(p, x - step * c)) / (2.0 * step)


def panel_count(t, step):
    return max(1, int(math.ceil(abs(t) / step - 1e-9)))


def _signed_integral(p, t, phi, m, inner=None):
    """Trapezoid value of ``int_{-t}^0 K(t,s) F(s) ds`` on ``m`` panels.

    ``F = h o P_o phi`` unless ``inner`` (samples -> integrand rows) is given.
    """
    if t == 0.0:
        return np.zeros(p.dim)
    a, b = (-t, 0.0) if t > 0 else (0.0, -t)
    s = np.linspace(a, b, m + 1)
    s[-1] = b
    x = odd_prolong(phi, s)
    F = _h_rows(p, x) if inner is None else inner(s, x)
    rows = np.einsum("mij,mj->mi", _kernel_stack(p, t, t + s), F)
    w = np.full(m + 1, (b - a) / m)
    w[0] *= 0.5
    w[-1] *= 0.5
    val = w @ rows
    return val if t > 0 else -val


def vide_g(p, t, phi, step):
    """``int_{-t}^0 K(t,s) h((P_o phi)(s)) ds`` by the trapezoid rule with spacing about ``step``.

    For ``t < 0`` the orientation of [-t, 0] is reversed and the odd
    prolongation supplies the values at positive arguments.
    """
    return _signed_integral(p, float(t), phi, panel_count(t, step))


def vide_g_derivative(p, t, phi, dt, chi, step):
    """Derivative of :func:`vide_g` in the direction ``(dt, chi)``.

    The history part uses the exact substitution derivative; the time part
    is a central difference at a frozen panel count.
    """
    m = panel_count(t, step)

    def lin(s, x):
        return substitute_h_derivative(p, x, odd_prolong(chi, s))

    out = _signed_integral(p, float(t), phi, m, inner=lin)
    if dt != 0.0:
        d = EPS ** (1.0 / 3.0) * (1.0 + abs(t))
        gp = _signed_integral(p, t + d, phi, m)
        gm = _signed_integral(p, t - d, phi, m)
        out = out + dt * (gp - gm) / (2.0 * d)
    return out


def as_nonautonomous(p, step):
    """Wrap the VIDE as ``g(t, phi)``; its delay grows with the elapsed time."""
    return RhsNonautonomous(
        dim=p.dim,
        eval=lambda t, phi: vide_g(p, t, phi, step),
        delay_horizon=1.0,
        dir_deriv=lambda t, phi, dt, chi: vide_g_derivative(p, t, phi, dt, chi, step),
        growing_delay=True,
        name=p.name,
    )


def solve_vide(p, T, cfg=None, history=None):
    """Solve the VIDE on [0, T] through the clock-augmented process from ``t0 = 0``."""
    cfg = cfg or SolverConfig()
    g = as_nonautonomous(p, cfg.grid_step)
    phi = p.initial_history() if history is None else history
    return solve_process(g, T, 0.0, phi, cfg)


def volterra_direct(p, T, step):
    """Product-trapezoid marching with one predictor-corrector sweep per step.

    Returns ``(nodes, values)`` on a uniform grid of [0, T].
    """
    N = max(1, int(math.ceil(T / step - 1e-9)))
    t = np.linspace(0.0, T, N + 1)
    dt = T / N
    n = p.dim
    x = np.zeros((N + 1, n))
    H = np.zeros((N + 1, n))
    x[0] = p.x0
    H[0] = _h_rows(p, x[:1])[0]

    def memory(m):
        if m == 0:
            return np.zeros(n)
        rows = np.einsum("mij,mj->mi", _kernel_stack(p, t[m], t[: m + 1]), H[: m + 1])
        return dt * (rows[1:-1].sum(axis=0) + 0.5 * (rows[0] + rows[-1]))

    for m in range(N):
        phi_m = memory(m)
        H[m + 1] = _h_rows(p, (x[m] + dt * phi_m)[None, :])[0]
        phi_pred = memory(m + 1)
        x[m + 1] = x[m] + 0.5 * dt * (phi_m + phi_pred)
        H[m + 1] = _h_rows(p, x[m + 1 : m + 2])[0]
    return t, x


def route_distance(prun, nodes, values):
    """Max difference between a process-route VIDE solution and samples on ``nodes``."""
    traj = prun.run.trajectory
    z = traj.evaluate(np.asarray(nodes) - prun.t0)[:, 1:]
    return float(np.max(np.linalg.norm(z - values, axis=1)))


def integration_operator(p, psi, u, step):
    """``(I psi)(u) = int_{-u}^0 K(u, s) psi(s) ds`` for a vectorized ``psi`` on R."""
    m = panel_count(u, step)
    if u == 0.0:
        return np.zeros(p.dim)
    a, b = (-u, 0.0) if u > 0 else (0.0, -u)
    s = np.linspace(a, b, m + 1)
    rows = np.einsum("mij,mj->mi", _kernel_stack(p, u, u + s), np.asarray(psi(s), dtype=float).reshape(-1, p.dim))
    val = (b - a) / m * (rows[1:-1].sum(axis=0) + 0.5 * (rows[0] + rows[-1]))
    return val if u > 0 else -val


def integration_operator_derivative(p, psi, u, step):
    """Leibniz form ``K(u, -u) psi(-u) + int_{-u}^0 d1K(u, s) psi(s) ds``.

    ``d1K`` is taken by central differences of ``K`` in its first argument.
    """
    d = EPS ** (1.0 / 3.0) * (1.0 + abs(u))
    boundary = shifted_kernel(p, u, -u) @ np.asarray(psi(np.array([-u])), dtype=float).reshape(p.dim)
    if u == 0.0:
        return boundary
    m = panel_count(u, step)
    a, b = (-u, 0.0) if u > 0 else (0.0, -u)
    s = np.linspace(a, b, m + 1)
    d1K = (_kernel_stack(p, u + d, u + d + s) - _kernel_stack(p, u - d, u - d + s)) / (2.0 * d)
    rows = np.einsum("mij,mj->mi", d1K, np.asarray(psi(s), dtype=float).reshape(-1, p.dim))
    val = (b - a) / m * (rows[1:-1].sum(axis=0) + 0.5 * (rows[0] + rows[-1]))
    return boundary + (val if u > 0 else -val)
