"""Finite representations of histories, trajectories and forward paths.

A history is a continuous map (-inf, 0] -> R^n.  It is stored as samples on a
bounded window [-D, 0] plus a tail rule for arguments below -D.  Trajectories
carry a history together with forward samples on [0, T]; forward paths are
samples on [0, T] only, optionally pinned to zero at the origin.

Every object in this module is immutable after construction.  Values are
returned as arrays of shape ``(n,)`` for scalar arguments and ``(k, n)`` for
1-D arrays of arguments.
"""

from __future__ import annotations

import csv
import io
from enum import Enum

import numpy as np

from .errors import DomainError, InvariantError

#: absolute slack accepted above the right end of a domain (round-off in t+s)
DOMAIN_SLACK = 1e-9

#: points inserted between stored nodes when a seminorm is sampled
SEMINORM_OVERSAMPLE = 4

#: sample density for closure tails, which have no stored nodes
_TAIL_DENSITY = 64


class TailPolicy(Enum):
    CONSTANT_EXTENSION = "constant"
    USER_CLOSURE = "closure"


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _as_samples(values, k, name):
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v.reshape(k, 1) if v.shape[0] == k else v.reshape(1, -1)
    if v.ndim != 2 or v.shape[0] != k:
        raise InvariantError(f"{name} must have one row per node, got shape {np.shape(values)}")
    if not np.all(np.isfinite(v)):
        raise InvariantError(f"{name} contain non-finite entries")
    return _readonly(v)


def _check_nodes(nodes):
    t = np.asarray(nodes, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvariantError("nodes must be a non-empty 1-D array")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvariantError("nodes must be strictly increasing")
    return _readonly(t)


def _cell_index(nodes, t):
    i = np.searchsorted(nodes, t, side="right") - 1
    np.maximum(i, 0, out=i)
    np.minimum(i, len(nodes) - 2, out=i)
    return i


def interpolate(nodes, values, derivs, t):
    """Piecewise cubic Hermite interpolation, linear when ``derivs`` is None.

    ``t`` is a 1-D array inside ``[nodes[0], nodes[-1]]``.  Stored samples are
    reproduced exactly at the nodes.
    """
    if len(nodes) == 1:
        return np.repeat(values[:1], len(t), axis=0)
    i = _cell_index(nodes, t)
    a = nodes[i]
    h = nodes[i + 1] - a
    th = (t - a) / h
    out = np.empty((len(t), values.shape[1]))
    # column-wise gathers are much cheaper than row gathers
    if derivs is None:
        for k, col in enumerate(values.T):
            v0 = col[i]
            out[:, k] = v0 + th * (col[i + 1] - v0)
    else:
        om = 1.0 - th
        c1 = th * th * (3.0 - 2.0 * th)
        hto = h * th * om
        c2 = hto * om
        c3 = -hto * th
        for k, (col, dcol) in enumerate(zip(values.T, derivs.T)):
            v0 = col[i]
            out[:, k] = v0 + c1 * (col[i + 1] - v0) + c2 * dcol[i] + c3 * dcol[i + 1]
    end = th == 1.0
    if end.any():
        out[end] = values[i[end] + 1]
    return out


def interpolate_scalar(nodes, values, derivs, t):
    """Scalar-argument fast path of :func:`interpolate`; returns shape ``(n,)``."""
    n = len(nodes)
    if n == 1:
        return values[0].copy()
    i = int(np.searchsorted(nodes, t, side="right")) - 1
    i = 0 if i < 0 else (n - 2 if i > n - 2 else i)
    a = nodes[i]
    h = nodes[i + 1] - a
    th = (t - a) / h
    if th == 0.0:
        return values[i].copy()
    if derivs is None:
        return values[i] + th * (values[i + 1] - values[i])
    th2 = th * th
    th3 = th2 * th
    return (
        (2 * th3 - 3 * th2 + 1) * values[i]
        + (th3 - 2 * th2 + th) * h * derivs[i]
        + (-2 * th3 + 3 * th2) * values[i + 1]
        + (th3 - th2) * h * derivs[i + 1]
    )


def interpolate_derivative(nodes, values, derivs, t):
    if len(nodes) == 1:
        return np.zeros((len(t), values.shape[1])) if derivs is None else np.repeat(derivs[:1], len(t), axis=0)
    i = _cell_index(nodes, t)
    h = (nodes[i + 1] - nodes[i])[:, None]
    v0, v1 = values[i], values[i + 1]
    if derivs is None:
        return (v1 - v0) / h
    th = ((t - nodes[i]) / (nodes[i + 1] - nodes[i]))[:, None]
    th2 = th * th
    return (
        (6 * th2 - 6 * th) * v0 / h
        + (3 * th2 - 4 * th + 1) * derivs[i]
        + (6 * th - 6 * th2) * v1 / h
        + (3 * th2 - 2 * th) * derivs[i + 1]
    )


class History:
    """Base class for elements of C((-inf, 0], R^n).

    Subclasses implement ``_eval`` (and ``_deriv``) on 1-D arrays of
    arguments that are already known to be <= 0, and ``sample_times``.
    """

    dim: int
    depth: float

    def evaluate(self, s):
        if isinstance(s, (float, int)):
            if s > DOMAIN_SLACK:
                raise DomainError(f"history evaluated at s={s:g} > 0")
            return self._eval1(min(float(s), 0.0))
        arr = np.asarray(s, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size and flat.max() > DOMAIN_SLACK:
            raise DomainError(f"history evaluated at s={flat.max():g} > 0")
        out = self._eval(np.minimum(flat, 0.0))
        if arr.ndim == 0:
            return out[0]
        return out.reshape(arr.shape + (self.dim,))

    __call__ = evaluate

    def derivative(self, s):
        arr = np.asarray(s, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size and flat.max() > DOMAIN_SLACK:
            raise DomainError(f"history derivative at s={flat.max():g} > 0")
        out = self._deriv(np.minimum(flat, 0.0))
        return out[0] if arr.ndim == 0 else out.reshape(arr.shape + (self.dim,))

    def _eval(self, s):
        raise NotImplementedError

    def _eval1(self, s):
        return self._eval(np.array([s]))[0]

    def _deriv(self, s):
        # central differences, one-sided at the right end
        h = 1e-6
        lo = s - h
        hi = np.minimum(s + h, 0.0)
        return (self._eval(hi) - self._eval(lo)) / (hi - lo)[:, None]

    def sample_times(self, lo, hi):
        """Knot positions in ``[lo, hi]`` where the representation changes."""
        raise NotImplementedError

    def materialize(self, depth=None):
        """Copy into a sampled :class:`HistoryFunction`.

        Samples are taken at the knots of the window ``[-depth, 0]``; below
        the window the result delegates to this object.
        """
        depth = self.depth if depth is None else float(depth)
        knots = self.sample_times(-depth, 0.0)
        nodes = np.unique(np.concatenate([[-depth, 0.0], knots]))
        nodes = nodes[(nodes >= -depth) & (nodes <= 0.0)]
        values = self._eval(nodes)
        derivs = self._deriv(nodes) if self.has_derivatives else None
        src = self
        return HistoryFunction(nodes, values, derivs, tail=lambda s: src._eval(np.asarray(s, dtype=float)))

    @property
    def has_derivatives(self):
        return False

    def __add__(self, other):
        return CombinationHistory([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return CombinationHistory([(1.0, self), (-1.0, other)])

    def __rmul__(self, a):
        return CombinationHistory([(float(a), self)])


class HistoryFunction(History):
    """Sampled history: nodes on [-D, 0] with the last node at 0.

    Parameters
    ----------
    nodes : array_like, shape (k,)
        Strictly increasing sample times ending exactly at 0.
    values : array_like, shape (k, n)
    derivs : array_like, shape (k, n), optional
        Derivative samples; switches interpolation from linear to cubic
        Hermite.
    tail : callable, optional
        ``s -> R^n`` used for ``s < -D``.  ``None`` selects constant
        extension by ``values[0]``.  Closures should accept 1-D arrays.
    """

    def __init__(self, nodes, values, derivs=None, tail=None):
        self.nodes = _check_nodes(nodes)
        if self.nodes[-1] != 0.0:
            raise InvariantError("last history node must be exactly 0")
        k = len(self.nodes)
        self.values = _as_samples(values, k, "values")
        self.dim = self.values.shape[1]
        self.derivs = None if derivs is None else _as_samples(derivs, k, "derivs")
        if self.derivs is not None and self.derivs.shape != self.values.shape:
            raise InvariantError("derivs must match values in shape")
        self.tail = tail
        self.depth = float(-self.nodes[0])

    @property
    def tail_policy(self):
        return TailPolicy.CONSTANT_EXTENSION if self.tail is None else TailPolicy.USER_CLOSURE

    @property
    def has_derivatives(self):
        return self.derivs is not None

    @classmethod
    def constant(cls, c, depth=1.0):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if depth <= 0:
            return cls([0.0], c[None, :], np.zeros((1, c.size)))
        return cls([-float(depth), 0.0], np.vstack([c, c]), np.zeros((2, c.size)))

    @classmethod
    def zero(cls, dim):
        return cls.constant(np.zeros(dim), depth=0.0)

    @classmethod
    def from_function(cls, fn, depth, step, deriv=None, exact_tail=True):
        """Sample a vectorized ``fn`` on ``[-depth, 0]`` with spacing ``step``.

        With ``exact_tail`` the closure ``fn`` itself supplies values below
        the window; otherwise the tail is the constant extension.
        """
        m = max(1, int(np.ceil(depth / step - 1e-9)))
        nodes = np.linspace(-depth, 0.0, m + 1)
        nodes[-1] = 0.0
        values = _column(fn(nodes), len(nodes))
        derivs = None if deriv is None else _column(deriv(nodes), len(nodes))
        tail = (lambda s: _column(fn(np.asarray(s, dtype=float)), np.size(s))) if exact_tail else None
        return cls(nodes, values, derivs, tail=tail)

    @classmethod
    def linear(cls, a, b, depth=1.0):
        """The history s -> a + b s, exact on all of (-inf, 0]."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.broadcast_to(np.asarray(b, dtype=float), a.shape).copy()
        nodes = np.array([-float(depth), 0.0])
        values = a[None, :] + nodes[:, None] * b[None, :]
        derivs = np.vstack([b, b])
        return cls(nodes, values, derivs, tail=lambda s: a[None, :] + np.asarray(s, dtype=float).reshape(-1, 1) * b[None, :])

    def _eval(self, s):
        if s.size and s[0] >= self.nodes[0] and s.min() >= self.nodes[0]:
            return interpolate(self.nodes, self.values, self.derivs, s)
        out = np.empty((s.size, self.dim))
        below = s < self.nodes[0]
        inside = ~below
        if np.any(inside):
            out[inside] = interpolate(self.nodes, self.values, self.derivs, s[inside])
        if np.any(below):
            if self.tail is None:
                out[below] = self.values[0]
            else:
                out[below] = _tail_values(self.tail, s[below], self.dim)
        return out

    def _eval1(self, s):
        if s < self.nodes[0]:
            if self.tail is None:
                return self.values[0].copy()
            return _tail_values(self.tail, np.array([s]), self.dim)[0]
        return interpolate_scalar(self.nodes, self.values, self.derivs, s)

    def _deriv(self, s):
        out = np.empty((s.size, self.dim))
        below = s < self.nodes[0]
        inside = ~below
        if np.any(inside):
            out[inside] = interpolate_derivative(self.nodes, self.values, self.derivs, s[inside])
        if np.any(below):
            if self.tail is None:
                out[below] = 0.0
            else:
                h = 1e-6
                sb = s[below]
                out[below] = (_tail_values(self.tail, sb + h, self.dim) - _tail_values(self.tail, sb - h, self.dim)) / (2 * h)
        return out

    def sample_times(self, lo, hi):
        t = self.nodes[(self.nodes >= lo) & (self.nodes <= hi)]
        if self.tail is not None and lo < self.nodes[0]:
            top = min(hi, self.nodes[0])
            m = max(1, int(np.ceil((top - lo) * _TAIL_DENSITY)))
            t = np.concatenate([np.linspace(lo, top, m + 1), t])
        return t

    def __repr__(self):
        return f"HistoryFunction(dim={self.dim}, depth={self.depth:g}, nodes={len(self.nodes)}, tail={self.tail_policy.value})"


def _column(v, k):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = np.full(k, float(v))
    if v.ndim == 1:
        v = v.reshape(k, -1) if k > 1 or v.size == 1 else v.reshape(1, -1)
    return v


def _tail_values(tail, s, dim):
    try:
        v = np.asarray(tail(s), dtype=float)
        if v.shape == (s.size, dim):
            return v
        if dim == 1 and v.shape == (s.size,):
            return v.reshape(-1, 1)
    except (TypeError, ValueError):
        pass
    return np.array([np.atleast_1d(np.asarray(tail(x), dtype=float)) for x in s]).reshape(s.size, dim)


class SegmentView(History):
    """The segment s -> x(t + s) of a trajectory, without copying samples."""

    __slots__ = ("traj", "t", "depth", "dim")

    def __init__(self, traj, t, depth=None):
        self.traj = traj
        self.t = float(t)
        self.dim = traj.dim
        self.depth = traj.base.depth + self.t if depth is None else float(depth)

    @property
    def has_derivatives(self):
        return self.traj.has_derivatives

    def _eval(self, s):
        return self.traj._eval(self.t + s)

    def _eval1(self, s):
        return self.traj._eval1(self.t + s)

    def _deriv(self, s):
        return self.traj._deriv(self.t + s)

    def sample_times(self, lo, hi):
        return self.traj.sample_times(self.t + lo, self.t + hi) - self.t


class CombinationHistory(History):
    """Pointwise linear combination ``sum_i c_i * h_i``."""

    def __init__(self, terms):
        self.terms = tuple((float(c), h) for c, h in terms)
        dims = {h.dim for _, h in self.terms}
        if len(dims) != 1:
            raise InvariantError("combined histories must share a dimension")
        self.dim = dims.pop()
        self.depth = max(h.depth for _, h in self.terms)

    @property
    def has_derivatives(self):
        return all(h.has_derivatives for _, h in self.terms)

    def _eval(self, s):
        out = np.zeros((s.size, self.dim))
        for c, h in self.terms:
            if c != 0.0:
                out += c * h._eval(s)
        return out

    def _eval1(self, s):
        out = np.zeros(self.dim)
        for c, h in self.terms:
            if c != 0.0:
                out += c * h._eval1(s)
        return out

    def _deriv(self, s):
        out = np.zeros((s.size, self.dim))
        for c, h in self.terms:
            if c != 0.0:
                out += c * h._deriv(s)
        return out

    def sample_times(self, lo, hi):
        return np.unique(np.concatenate([h.sample_times(lo, hi) for _, h in self.terms]))


class StackedHistory(History):
    """Componentwise product of histories, e.g. (clock, state)."""

    def __init__(self, parts):
        self.parts = tuple(parts)
        self.dim = sum(p.dim for p in self.parts)
        self.depth = max(p.depth for p in self.parts)

    @property
    def has_derivatives(self):
        return all(p.has_derivatives for p in self.parts)

    def _eval(self, s):
        return np.hstack([p._eval(s) for p in self.parts])

    def _eval1(self, s):
        return np.concatenate([p._eval1(s) for p in self.parts])

    def _deriv(self, s):
        return np.hstack([p._deriv(s) for p in self.parts])

    def sample_times(self, lo, hi):
        return np.unique(np.concatenate([p.sample_times(lo, hi) for p in self.parts]))


class ProjectedHistory(History):
    """Selected components of a history (drops e.g. the clock)."""

    __slots__ = ("base", "index", "dim", "depth")

    def __init__(self, base, index):
        self.base = base
        self.index = index
        self.dim = len(range(base.dim)[index]) if isinstance(index, slice) else len(index)
        self.depth = base.depth

    @property
    def has_derivatives(self):
        return self.base.has_derivatives

    def _eval(self, s):
        return self.base._eval(s)[:, self.index]

    def _eval1(self, s):
        return self.base._eval1(s)[self.index]

    def _deriv(self, s):
        return self.base._deriv(s)[:, self.index]

    def sample_times(self, lo, hi):
        return self.base.sample_times(lo, hi)


class Trajectory:
    """A history followed by forward samples on [0, T].

    ``values[0]`` must equal ``base(0)`` exactly, so the trajectory is
    continuous at 0.  ``derivs`` holds the right-hand side along the
    solution and enables Hermite interpolation on the forward part.
    """

    def __init__(self, base, nodes, values, derivs=None):
        self.base = base
        self.nodes = _check_nodes(nodes)
        if self.nodes[0] != 0.0:
            raise InvariantError("forward nodes must start at 0")
        k = len(self.nodes)
        self.values = _as_samples(values, k, "values")
        self.dim = self.values.shape[1]
        if self.dim != base.dim:
            raise InvariantError("trajectory and history dimensions differ")
        self.derivs = None if derivs is None else _as_samples(derivs, k, "derivs")
        if not np.array_equal(self.values[0], base.evaluate(0.0)):
            raise InvariantError("trajectory is discontinuous at t=0")

    @property
    def horizon(self):
        return float(self.nodes[-1])

    @property
    def has_derivatives(self):
        return self.derivs is not None

    def evaluate(self, t):
        if isinstance(t, (float, int)):
            if t > self.horizon + DOMAIN_SLACK * max(1.0, self.horizon):
                raise DomainError(f"trajectory on (-inf, {self.horizon:g}] evaluated at t={t:g}")
            return self._eval1(float(t))
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size and flat.max() > self.horizon + DOMAIN_SLACK * max(1.0, self.horizon):
            raise DomainError(f"trajectory on (-inf, {self.horizon:g}] evaluated at t={flat.max():g}")
        out = self._eval(flat)
        return out[0] if arr.ndim == 0 else out.reshape(arr.shape + (self.dim,))

    __call__ = evaluate

    def derivative(self, t):
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        out = self._deriv(flat)
        return out[0] if arr.ndim == 0 else out.reshape(arr.shape + (self.dim,))

    def _eval(self, t):
        t = np.minimum(t, self.horizon)
        if t.size > 1 and np.all(t[1:] >= t[:-1]):
            # sorted arguments (quadrature grids): split at 0 by slicing
            k = int(np.searchsorted(t, 0.0))
            if k == 0:
                return interpolate(self.nodes, self.values, self.derivs, t)
            if k == t.size:
                return self.base._eval(t)
            return np.concatenate([self.base._eval(t[:k]), interpolate(self.nodes, self.values, self.derivs, t[k:])])
        out = np.empty((t.size, self.dim))
        neg = t < 0.0
        pos = ~neg
        if np.any(neg):
            out[neg] = self.base._eval(t[neg])
        if np.any(pos):
            out[pos] = interpolate(self.nodes, self.values, self.derivs, t[pos])
        return out

    def _eval1(self, t):
        if t < 0.0:
            return self.base._eval1(t)
        T = self.nodes[-1]
        return interpolate_scalar(self.nodes, self.values, self.derivs, T if t > T else t)

    def _deriv(self, t):
        t = np.minimum(t, self.horizon)
        out = np.empty((t.size, self.dim))
        neg = t < 0.0
        pos = ~neg
        if np.any(neg):
            out[neg] = self.base._deriv(t[neg])
        if np.any(pos):
            out[pos] = interpolate_derivative(self.nodes, self.values, self.derivs, t[pos])
        return out

    def segment(self, t, depth=None):
        if t < -DOMAIN_SLACK or t > self.horizon + DOMAIN_SLACK * max(1.0, self.horizon):
            raise DomainError(f"segment time {t:g} outside [0, {self.horizon:g}]")
        return SegmentView(self, min(max(t, 0.0), self.horizon), depth)

    def sample_times(self, lo, hi):
        parts = []
        if lo < 0.0:
            parts.append(self.base.sample_times(lo, min(hi, 0.0)))
        parts.append(self.nodes[(self.nodes >= lo) & (self.nodes <= hi)])
        return np.concatenate(parts)

    def rows(self):
        """Sampled rows ``(times, values, derivs)`` covering the history window and [0, T].

        ``derivs`` is None unless the forward part carries derivative samples.
        """
        hist_t = self.base.sample_times(-self.base.depth, 0.0)
        hist_t = np.unique(hist_t[hist_t < 0.0])
        times = np.concatenate([hist_t, self.nodes])
        values = np.vstack([self.base._eval(hist_t), self.values])
        derivs = None
        if self.derivs is not None:
            derivs = np.vstack([self.base._deriv(hist_t), self.derivs])
        return times, values, derivs

    def __repr__(self):
        return f"Trajectory(dim={self.dim}, horizon={self.horizon:g}, nodes={len(self.nodes)})"


class ForwardPath:
    """Samples of a path on [0, T]; ``zero_at_origin`` marks elements of C_{0T,0}."""

    def __init__(self, nodes, values, derivs=None, zero_at_origin=False):
        self.nodes = _check_nodes(nodes)
        if self.nodes[0] != 0.0:
            raise InvariantError("forward paths start at t=0")
        k = len(self.nodes)
        self.values = _as_samples(values, k, "values")
        self.dim = self.values.shape[1]
        self.derivs = None if derivs is None else _as_samples(derivs, k, "derivs")
        self.zero_at_origin = bool(zero_at_origin)
        if self.zero_at_origin and np.any(self.values[0] != 0.0):
            raise InvariantError("path flagged zero_at_origin has nonzero value at t=0")

    @property
    def horizon(self):
        return float(self.nodes[-1])

    @classmethod
    def zeros(cls, nodes, dim):
        return cls(nodes, np.zeros((len(nodes), dim)), np.zeros((len(nodes), dim)), zero_at_origin=True)

    def sup(self):
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def evaluate(self, t):
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size and (flat.min() < -DOMAIN_SLACK or flat.max() > self.horizon + DOMAIN_SLACK):
            raise DomainError("forward path evaluated outside [0, T]")
        out = interpolate(self.nodes, self.values, self.derivs, np.clip(flat, 0.0, self.horizon))
        return out[0] if arr.ndim == 0 else out.reshape(arr.shape + (self.dim,))

    __call__ = evaluate


# ---------------------------------------------------------------------------
# operators


def evaluate(x, s):
    return x.evaluate(s)


def segment(x, t, depth=None):
    """The history ``x_t``; a view that delegates to ``x``."""
    return x.segment(t, depth)


def prolong_const(phi, T, nodes=None):
    """Extend ``phi`` by its value at 0 on [0, T]."""
    nodes = np.array([0.0, float(T)]) if nodes is None else np.asarray(nodes, dtype=float)
    if T == 0:
        nodes = np.array([0.0])
    v0 = phi.evaluate(0.0)
    k = len(nodes)
    return Trajectory(phi, nodes, np.tile(v0, (k, 1)), np.zeros((k, phi.dim)))


def zero_extend(eta):
    if not eta.zero_at_origin:
        raise InvariantError("zero_extend needs a path with eta(0) = 0")
    return Trajectory(HistoryFunction.zero(eta.dim), eta.nodes, eta.values, eta.derivs)


def concat(eta, phi):
    """Trajectory equal to ``phi`` on (-inf, 0] and ``phi(0) + eta`` on [0, T]."""
    if not eta.zero_at_origin:
        raise InvariantError("concat needs a path with eta(0) = 0")
    return Trajectory(phi, eta.nodes, phi.evaluate(0.0)[None, :] + eta.values, eta.derivs)


def odd_prolong(phi, s):
    """Point reflection of ``phi`` through (0, phi(0)) for positive arguments."""
    arr = np.asarray(s, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    pos = flat > 0.0
    out = phi._eval(np.where(pos, -flat, flat))
    if pos.any():
        out[pos] = 2.0 * phi._eval1(0.0) - out[pos]
    return out[0] if arr.ndim == 0 else out.reshape(arr.shape + (phi.dim,))


def _window(x, j):
    hi = x.horizon if isinstance(x, Trajectory) else 0.0
    return hi - float(j), hi


def seminorm(x, j, oversample=SEMINORM_OVERSAMPLE):
    """Max of the Euclidean norm over the window of length ``j`` ending at the right end.

    Sampled at stored knots with ``oversample - 1`` extra points per gap.
    """
    if j <= 0:
        raise InvariantError("seminorm index must be positive")
    lo, hi = _window(x, j)
    knots = np.unique(np.concatenate([[lo, hi], x.sample_times(lo, hi)]))
    knots = knots[(knots >= lo) & (knots <= hi)]
    if len(knots) > 1 and oversample > 1:
        frac = np.arange(oversample) / oversample
        pts = (knots[:-1, None] + frac[None, :] * np.diff(knots)[:, None]).ravel()
        knots = np.concatenate([pts, knots[-1:]])
    vals = x.evaluate(knots)
    return float(np.max(np.linalg.norm(vals, axis=1)))


def history_distance(a, b, j):
    """``|a - b|_j`` for two histories."""
    return seminorm(CombinationHistory([(1.0, a), (-1.0, b)]), j)


# ---------------------------------------------------------------------------
# CSV


def csv_header(dim, with_derivs):
    cols = ["t"] + [f"x{i + 1}" for i in range(dim)]
    if with_derivs:
        cols += [f"d{i + 1}" for i in range(dim)]
    return cols


def write_csv(fh, times, values, derivs=None):
    """Write rows ``t,x1..xn[,d1..dn]`` sorted by t, round-trip float format."""
    values = np.asarray(values, dtype=float).reshape(len(times), -1)
    order = np.argsort(times, kind="stable")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(csv_header(values.shape[1], derivs is not None))
    for i in order:
        row = [times[i], *values[i]]
        if derivs is not None:
            row += list(derivs[i])
        w.writerow([repr(float(v)) for v in row])


def trajectory_to_csv(traj):
    buf = io.StringIO()
    write_csv(buf, *traj.rows())
    return buf.getvalue()


def read_csv(fh):
    """Parse a history/trajectory CSV into ``(times, values, derivs)``."""
    rows = list(csv.reader(fh))
    if not rows:
        raise InvariantError("empty CSV")
    header = [c.strip() for c in rows[0]]
    if header[0] != "t":
        raise InvariantError("CSV header must start with 't'")
    xcols = [i for i, c in enumerate(header) if c.startswith("x")]
    dcols = [i for i, c in enumerate(header) if c.startswith("d")]
    if dcols and len(dcols) != len(xcols):
        raise InvariantError("derivative columns must match state columns")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise InvariantError("CSV rows must be sorted by strictly increasing t")
    return times, data[:, xcols], (data[:, dcols] if dcols else None)


def read_history_csv(path):
    """Load a :class:`HistoryFunction` from CSV; rows with t > 0 are ignored."""
    with open(path, newline="", encoding="utf-8") as fh:
        times, values, derivs = read_csv(fh)
    keep = times <= 0.0
    if not np.any(times == 0.0):
        raise InvariantError("history CSV needs a row at t = 0")
    return HistoryFunction(times[keep], values[keep], None if derivs is None else derivs[keep])
