"""Densities g(x, y) that are 1-periodic in the fast variable y.

A :class:`PeriodicField` wraps an expression tree in the slow variables
``x1..xn`` and the fast variables ``y1..yn``. The fast variables are reduced
mod 1 before evaluation so large arguments (y = x/eps with tiny eps) do not
lose digits inside the trig functions; the slow variables are never reduced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import expression as ex
from .errors import AccuracyError, DomainError
from .quadrature import PANEL_CHUNK, composite_rule, gauss_legendre, golden_section, integrate_panels, refine_edges, uniform_edges

GL_ORDER = 8
CELL_RTOL = 1e-8
MAX_GRID = 1024
CELL_NODE_BUDGET = 1 << 26
LOOP_PANELS_PER_UNIT = 16
LOOP_PANELS_FALLBACK = 64


def _frac(y):
    """y - floor(y); far cheaper than np.mod for the period reduction."""
    y = np.asarray(y, dtype=float)
    return y - np.floor(y)


class PeriodicField:
    """Density g(x, y), 1-periodic in every fast coordinate.

    Parameters
    ----------
    expr : str
        Infix expression, e.g. ``"abs(sin(pi*y1)*sin(pi*y2))"``.
    n : int, optional
        Ambient dimension. Inferred from the highest variable index when
        omitted (at least 2).
    """

    def __init__(self, expr: str, n: int | None = None):
        self.text = str(expr)
        self.tree = ex.parse(self.text)
        used = ex.variables_used(self.tree)
        top = max((int(v[1:]) for v in used), default=0)
        if n is None:
            n = max(2, top)
        if top > n:
            raise DomainError(f"expression uses index {top} but dimension is {n}")
        if not 1 <= n <= 3:
            raise DomainError(f"dimension must be 1, 2 or 3, got {n}")
        self.n = n
        self.depends_on_y = sum(1 << (i - 1) for i in range(1, n + 1) if f"y{i}" in used)
        self.depends_on_x = sum(1 << (i - 1) for i in range(1, n + 1) if f"x{i}" in used)
        self._kink_args = ex.abs_arguments(self.tree)
        self._mean_cache = {}
        self._kink_fast = [frozenset(int(v[1:]) for v in ex.variables_used(a) if v[0] == "y")
                           for a in self._kink_args]

    def __repr__(self):
        return f"PeriodicField({self.text!r}, n={self.n})"

    @classmethod
    def constant(cls, value: float, n: int = 2):
        return cls(repr(float(value)), n=n)

    @property
    def oscillates(self) -> bool:
        return self.depends_on_y != 0

    def _env(self, x, y, reduce=True):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != self.n or y.shape[-1] != self.n:
            raise DomainError(f"points must have last dimension {self.n}")
        if reduce:
            y = _frac(y)
        env = {}
        for i in range(self.n):
            env[f"x{i + 1}"] = x[..., i]
            env[f"y{i + 1}"] = y[..., i]
        return env, np.broadcast_shapes(x.shape[:-1], y.shape[:-1])

    def __call__(self, x, y):
        """g(x, y) for arrays of shape (..., n); returns shape (...)."""
        env, shape = self._env(x, y)
        out = np.asarray(ex.evaluate(self.tree, env, self.text), dtype=float)
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    def eval_columns(self, x, y):
        """g from per-coordinate sequences ``x = (x1, .., xn)``, ``y = (y1, .., yn)``.

        Entries are scalars or mutually broadcastable 1-d arrays; this skips
        the stacked (..., n) layout on hot paths.
        """
        env = {}
        for i in range(self.n):
            env[f"x{i + 1}"] = x[i]
            env[f"y{i + 1}"] = _frac(y[i])
        return np.asarray(ex.evaluate(self.tree, env, self.text), dtype=float)

    @cached_property
    def y_frequency(self) -> float:
        """Bound on oscillation cycles per unit length in y (inf if unknown)."""
        return ex.y_frequency(self.tree)

    @cached_property
    def loop_panels(self) -> int:
        """Default panels per unit loop length: fewer than a half cycle per panel."""
        k = self.y_frequency
        if not math.isfinite(k):
            return LOOP_PANELS_FALLBACK
        return max(LOOP_PANELS_PER_UNIT, math.ceil(4 * k))

    eval = __call__

    def kink_values(self, x, y):
        """Arguments of every ``abs`` at unreduced fast coordinates."""
        env, _ = self._env(x, y, reduce=False)
        return [np.asarray(ex.evaluate(a, env, self.text), dtype=float) for a in self._kink_args]

    @property
    def kink_count(self) -> int:
        return len(self._kink_args)

    def kink_function(self, index: int, x_of_t, y_of_t):
        """Parameter map t -> argument of the index-th ``abs`` on a path."""
        arg = self._kink_args[index]

        def fn(t):
            env, _ = self._env(x_of_t(t), y_of_t(t), reduce=False)
            return np.broadcast_to(np.asarray(ex.evaluate(arg, env, self.text), dtype=float), np.shape(t))

        return fn


def _cell_rule(grid: int, n: int):
    t, w = composite_rule(uniform_edges(0.0, 1.0, grid), GL_ORDER)
    grids = np.meshgrid(*([t] * n), indexing="ij")
    weights = np.ones(1)
    for _ in range(n):
        weights = np.multiply.outer(weights, w)
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    return pts, weights.ravel()


def _cell_mean(f: PeriodicField, anchors, grid: int):
    pts, w = _cell_rule(grid, f.n)
    out = np.empty(len(anchors))
    step = max(1, CELL_NODE_BUDGET // (8 * len(w)))
    for s in range(0, len(anchors), step):
        a = anchors[s : s + step]
        vals = f(a[:, None, :], pts[None, :, :])
        out[s : s + step] = vals @ w
    return out


def _split_mean(f: PeriodicField, anchor, grid: int) -> float:
    """Cell mean for n <= 2 with panels split at the kinks of every ``abs``.

    In the plane the y2 integral is done line by line; the y1 axis is split
    at the roots of kink factors that depend on y1 alone, since those are
    where the line integrals have derivative jumps.
    """
    anchor = np.asarray(anchor, dtype=float)
    base = uniform_edges(0.0, 1.0, grid)

    def xs(t):
        return np.broadcast_to(anchor, np.shape(t) + (f.n,))

    if f.n == 1:
        ys = lambda t: np.asarray(t, dtype=float)[..., None]
        kinks = [f.kink_function(i, xs, ys) for i in range(f.kink_count)]
        return float(integrate_panels(base, lambda t: f(xs(t), ys(t)), GL_ORDER, kinks))
    outer = [f.kink_function(i, xs, lambda t: np.stack([t, np.zeros_like(t)], -1))
             for i, used in enumerate(f._kink_fast) if used == {1}]
    inner_idx = [i for i, used in enumerate(f._kink_fast) if 2 in used]
    s1, w1 = composite_rule(refine_edges(base, outer), GL_ORDER)
    Y1, Y2, W = [], [], []
    for a, wa in zip(s1, w1):
        line = lambda t, a=a: np.stack([np.full(np.shape(t), a), t], -1)
        kinks = [f.kink_function(i, xs, line) for i in inner_idx]
        t, w = composite_rule(refine_edges(base, kinks), GL_ORDER)
        Y1.append(np.full(t.size, a))
        Y2.append(t)
        W.append(wa * w)
    y = np.stack([np.concatenate(Y1), np.concatenate(Y2)], -1)
    return float(f(xs(y[:, 0]), y) @ np.concatenate(W))


def cell_average(f: PeriodicField, x=None, grid: int = 2, rtol: float = CELL_RTOL):
    """Average of g(x, .) over the unit cell.

    Composite Gauss-Legendre with ``grid`` panels per axis and 8 nodes per
    panel; the grid is doubled until two successive values agree to ``rtol``.
    Densities with ``abs`` in n <= 2 have their panels split at the kinks;
    otherwise a tensor rule is used.

    ``x`` is one anchor point of shape (n,) or a batch of shape (m, n); the
    result is a float or an array of length m accordingly. A density that does
    not depend on x is averaged once and broadcast.
    """
    if grid < 2:
        raise DomainError("grid must be at least 2")
    single = x is None or np.ndim(x) == 1
    anchors = np.zeros((1, f.n)) if x is None else np.atleast_2d(np.asarray(x, dtype=float))
    if f.depends_on_x == 0 and len(anchors) > 1:
        value = cell_average(f, anchors[0], grid, rtol)
        return np.full(len(anchors), value)
    if f.depends_on_y == 0:
        vals = f(anchors, np.zeros_like(anchors))
        return float(vals[0]) if single else vals
    key = (grid, rtol)
    if f.depends_on_x == 0 and key in f._mean_cache:
        return f._mean_cache[key]
    if f.kink_count and f.n <= 2:
        mean = lambda g: np.array([_split_mean(f, a, g) for a in anchors])
    else:
        mean = lambda g: _cell_mean(f, anchors, g)
    prev = mean(grid)
    while True:
        grid *= 2
        if grid > MAX_GRID or (grid * GL_ORDER) ** f.n > CELL_NODE_BUDGET * 4:
            raise AccuracyError(f"cell average did not converge to {rtol:g} before grid={grid // 2}")
        cur = mean(grid)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(1.0, np.abs(cur))):
            if f.depends_on_x == 0:
                f._mean_cache[key] = float(cur[0])
            return float(cur[0]) if single else cur
        prev = cur


@dataclass(frozen=True)
class TorusLoop:
    """Closed geodesic {y : y . m/|m| = phase} on the 2-torus.

    ``m`` is a coprime integer pair (p, q); the loop starts at phase*m/|m|,
    runs along (-q, p)/|m| and closes after arclength |m|. Phases that differ
    by a multiple of 1/|m| describe the same loop mod 1.
    """

    m: tuple
    phase: float = 0.0

    def __post_init__(self):
        p, q = (int(v) for v in self.m)
        if (p, q) == (0, 0) or math.gcd(p, q) != 1:
            raise DomainError(f"loop vector {self.m} is not a coprime integer pair")
        object.__setattr__(self, "m", (p, q))

    @property
    def length(self) -> float:
        return math.hypot(*self.m)

    @property
    def normal(self):
        return np.array(self.m, dtype=float) / self.length

    @property
    def tangent(self):
        p, q = self.m
        return np.array([-q, p], dtype=float) / self.length

    @property
    def start(self):
        return self.phase * self.normal

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.start + t[..., None] * self.tangent


def _loop_mean(f: PeriodicField, x_anchor, loop: TorusLoop, quad_per_unit: int):
    L = loop.length
    x_anchor = np.asarray(x_anchor, dtype=float)

    def xs(t):
        return np.broadcast_to(x_anchor, np.shape(t) + (2,))

    edges = uniform_edges(0.0, L, math.ceil(quad_per_unit * L))
    kinks = [f.kink_function(i, xs, loop.point) for i in range(f.kink_count)]
    (s1, s2), (t1, t2) = loop.start, loop.tangent
    x = tuple(x_anchor)

    def integrand(t):
        return f.eval_columns(x, (s1 + t * t1, s2 + t * t2))

    total = integrate_panels(edges, integrand, GL_ORDER, kinks)
    return float(total) / L


def _loop_means(f: PeriodicField, x_anchor, loop: TorusLoop, phases, quad_per_unit: int):
    """Loop means for many phases of one loop family.

    Short loops are laid end to end on one parameter line with a one-panel
    gap, loop j occupying [j S, j S + L] with S = L + gap, so a single
    kink-split rule serves a whole batch. Each loop is continued into the gap
    that follows it, so a sign change in its last panel is seen; gap panels
    are dropped from the sums.
    """
    L = loop.length
    per = math.ceil(quad_per_unit * L)
    group = PANEL_CHUNK // (per + 1)
    if group < 2:
        return np.array([_loop_mean(f, x_anchor, TorusLoop(loop.m, float(c)), quad_per_unit) for c in phases])
    x_anchor = np.asarray(x_anchor, dtype=float)
    normal, tangent = loop.normal, loop.tangent
    gap = L / per
    S = L + gap
    base = uniform_edges(0.0, L, per)
    out = np.empty(len(phases))
    for start in range(0, len(phases), group):
        ph = phases[start : start + group]
        k = len(ph)

        def ys(T):
            T = np.asarray(T, dtype=float)
            j = np.clip(np.floor((T + 0.5 * gap) / S), 0, k - 1).astype(int)
            return ph[j][..., None] * normal + (T - j * S)[..., None] * tangent

        def xs(T):
            return np.broadcast_to(x_anchor, np.shape(T) + (2,))

        edges = np.concatenate([j * S + base for j in range(k)])
        kinks = [f.kink_function(i, xs, ys) for i in range(f.kink_count)]
        edges = refine_edges(edges, kinks)
        left = edges[:-1]
        # half-gap shift keeps exact loop starts j S from rounding to loop j - 1
        owner = np.clip(np.floor((left + 0.5 * gap) / S), 0, k - 1).astype(int)
        local = left - owner * S
        keep = (local > -1e-9 * gap) & (local < L - 1e-9 * gap)
        t, w = _panel_rule(left[keep], edges[1:][keep])
        j = np.repeat(owner[keep], GL_ORDER)
        c, tl = ph[j], t - j * S
        vals = f.eval_columns(tuple(x_anchor), (c * normal[0] + tl * tangent[0], c * normal[1] + tl * tangent[1])) * w
        out[start : start + k] = np.bincount(j, weights=vals, minlength=k) / L
    return out


def _panel_rule(a, b):
    x, w = gauss_legendre(GL_ORDER)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def loop_average(f: PeriodicField, x_anchor, loop: TorusLoop | tuple, phase=None,
                 quad_per_unit: int | None = None):
    """Mean of g(x_anchor, .) along a closed torus loop.

    ``loop`` is a :class:`TorusLoop`, or an integer pair m together with
    ``phase`` (scalar or array of phases, in which case an array is returned).
    ``quad_per_unit`` defaults to ``f.loop_panels``, which keeps every panel
    below half an oscillation of g.
    """
    if f.n != 2:
        raise DomainError("loop averages are defined for n = 2 only")
    if quad_per_unit is None:
        quad_per_unit = f.loop_panels
    if quad_per_unit < 16:
        raise DomainError("quad_per_unit must be at least 16")
    if isinstance(loop, TorusLoop):
        return _loop_mean(f, x_anchor, loop, quad_per_unit)
    phases = np.asarray(0.0 if phase is None else phase, dtype=float)
    out = _loop_means(f, x_anchor, TorusLoop(tuple(loop)), phases.ravel(), quad_per_unit)
    return float(out[0]) if phases.ndim == 0 else out.reshape(phases.shape)


def loop_extremes(f: PeriodicField, x_anchor, m, phases: int = 256, refine: bool = True,
                  tol: float = 1e-8, quad_per_unit: int | None = None):
    """Max and min of the loop average over the phase period [0, 1/|m|).

    Returns ``(upper, argmax, lower, argmin)``. The uniform phase grid is
    followed by golden-section refinement on the two grid cells around each
    grid extremum unless ``refine`` is false.
    """
    period = 1.0 / math.hypot(*m)
    grid = np.arange(phases) * (period / phases)
    vals = loop_average(f, x_anchor, m, grid, quad_per_unit)
    out = []
    for maximize in (True, False):
        j = int(np.argmax(vals) if maximize else np.argmin(vals))
        best_c, best_v = grid[j], vals[j]
        if refine:
            a = grid[j] - period / phases
            b = grid[j] + period / phases
            c, v = golden_section(lambda c: loop_average(f, x_anchor, m, c, quad_per_unit),
                                  a, b, tol=tol, maximize=maximize)
            if (v > best_v) if maximize else (v < best_v):
                best_c, best_v = c % period, v
        out.extend([float(best_v), float(best_c)])
    return tuple(out)
