"""Directional averages of a periodic density.

For a point z and a unit direction nu the averages of g(z, .) over the
hyperplanes orthogonal to nu come in a triple (lower, mean, upper):

* irrational nu: the hyperplane foliates the torus and all three equal the
  cell average;
* rational nu = m/|m| (n = 2): the line closes into a torus loop of length
  |m|, and lower/upper are the min/max of the loop average over the loop's
  phase, which is what a sequence of eps values can select.

Also here: exact Weyl lattice sums, the covering scale pair (M_eps, rho_eps)
and finite plane averages at a fixed (eps, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDimensionError
from .geometry import Direction, classify_direction
from .periodic_field import PeriodicField, cell_average, loop_extremes
from .quadrature import composite_rule, integrate_panels, uniform_edges

PHASE_GRID = 256
PHASE_TOL = 1e-8
EXACT_LATTICE_N = 512
SAMPLE_POINTS = 1 << 20

FOLIATION = "foliation"
RATIONAL_LOOP = "rational_loop"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class WeylSum:
    nu_prime: tuple
    N: int
    value: complex | float
    target: complex | float
    count: int
    sampled: bool = False
    seed: int | None = None

    @property
    def error(self) -> float:
        return abs(self.value - self.target)


def _as_unary(h):
    if isinstance(h, PeriodicField):
        def fn(t):
            t = np.asarray(t, dtype=float)
            pts = np.zeros(t.shape + (h.n,))
            pts[..., 0] = t
            return h(np.zeros_like(pts), pts)
        return fn
    return h


def _unary_integral(h):
    if isinstance(h, PeriodicField):
        if h.depends_on_y & ~1:
            raise DomainError("Weyl sums need a density in y1 only")
        return cell_average(PeriodicField(h.text, n=max(h.n, 1)))
    fn = _as_unary(h)
    return integrate_panels(uniform_edges(0.0, 1.0, 1024), fn, 8)


def weyl_average(h, nu_prime, N: int, seed: int = 0) -> WeylSum:
    """Lattice average (1/|I_N|) sum_k h(k . nu' mod 1) over |k_i| <= N.

    ``h`` is a one-variable density (a :class:`PeriodicField` in ``y1``) or a
    vectorized callable on [0, 1), which may return complex values. The
    lattice is enumerated exactly for d = 1 and for d = 2 with N <= 512;
    beyond that a seeded uniform sample of lattice points is used and the
    result is labelled ``sampled``.
    """
    nu = tuple(float(v) for v in np.atleast_1d(nu_prime))
    d = len(nu)
    if d not in (1, 2):
        raise DomainError("nu' must have 1 or 2 components")
    if N < 1:
        raise DomainError("N must be positive")
    fn = _as_unary(h)
    k = np.arange(-N, N + 1, dtype=float)
    sampled = False
    if d == 1:
        a = np.mod(k * nu[0], 1.0)
    elif N <= EXACT_LATTICE_N:
        a = np.mod(np.add.outer(np.mod(k * nu[0], 1.0), np.mod(k * nu[1], 1.0)), 1.0).ravel()
    else:
        rng = np.random.default_rng(seed)
        kk = rng.integers(-N, N + 1, size=(SAMPLE_POINTS, 2)).astype(float)
        a = np.mod(np.mod(kk[:, 0] * nu[0], 1.0) + np.mod(kk[:, 1] * nu[1], 1.0), 1.0)
        sampled = True
    value = np.mean(fn(a))
    value = complex(value) if np.iscomplexobj(value) else float(value)
    target = _unary_integral(h)
    target = complex(target) if np.iscomplexobj(target) else float(target)
    return WeylSum(nu, int(N), value, target, int(a.size), sampled, seed if sampled else None)


@dataclass(frozen=True)
class AveragingTriple:
    lower: float
    mean: float
    upper: float
    mechanism: str
    m: tuple | None = None
    phase_argmax: float | None = None
    phase_argmin: float | None = None
    flagged: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


def directional_triple(f: PeriodicField, z, direction, phases: int = PHASE_GRID,
                       refine: bool = True, quad_per_unit: int | None = None) -> AveragingTriple:
    """(lower, mean, upper) averages of g(z, .) for hyperplanes normal to ``direction``.

    ``direction`` is a classified :class:`Direction` or a raw vector, which
    is classified with the default (Q, tol). Undetermined directions are
    never promoted: they yield a ``degenerate`` triple carrying the loop band
    of the best rational approximant on the phase grid, with ``flagged`` set.
    """
    if not isinstance(direction, Direction):
        direction = classify_direction(direction)
    z = np.asarray(z, dtype=float)
    mean = cell_average(f, z)
    if direction.is_irrational:
        return AveragingTriple(mean, mean, mean, FOLIATION)
    if direction.n != 2 or f.n != 2:
        raise UnsupportedDimensionError("rational directions are supported in the plane only")
    m = direction.m
    if direction.is_rational:
        hi, arg_hi, lo, arg_lo = loop_extremes(f, z, m, phases, True, PHASE_TOL, quad_per_unit)
        return AveragingTriple(min(lo, mean), mean, max(hi, mean), RATIONAL_LOOP, m, arg_hi, arg_lo)
    hi, arg_hi, lo, arg_lo = loop_extremes(f, z, m, phases, False, PHASE_TOL, quad_per_unit)
    return AveragingTriple(min(lo, mean), mean, max(hi, mean), DEGENERATE, m, arg_hi, arg_lo, True)


@dataclass(frozen=True)
class ScalePair:
    """Covering scales for a curve whose C1 modulus is tau(s) = L s.

    ``M = sqrt(min(1/tau(eps), 1/eps))`` and ``rho = eps M``. ``lhs`` and
    ``rhs`` are the two sides of M tau(eps M) <= sqrt(tau(sqrt(eps))); for
    linear moduli lhs equals min(1, L) exactly, so ``bound_holds`` is only
    true once L <= tau(sqrt eps)-scale, i.e. it is reported, not assumed.
    """

    epsilon: float
    L: float
    M: float
    rho: float
    lhs: float
    rhs: float

    @property
    def bound_holds(self) -> bool:
        return self.lhs <= self.rhs

    def tau(self, s):
        return self.L * s


def scale_pair(epsilon: float, L: float) -> ScalePair:
    if not 0 < epsilon < 1 or L <= 0:
        raise DomainError("need 0 < epsilon < 1 and L > 0")
    M = math.sqrt(min(1.0 / (L * epsilon), 1.0 / epsilon))
    rho = epsilon * M
    lhs = M * L * rho
    rhs = math.sqrt(L * math.sqrt(epsilon))
    return ScalePair(epsilon, L, M, rho, lhs, rhs)


def _plane_section(z, nu, r):
    """Vertices (in plane coordinates) of {(y - z).nu = 0} within the cube of half-side r."""
    u = np.cross(nu, np.eye(3)[np.argmin(np.abs(nu))])
    u /= np.linalg.norm(u)
    w = np.cross(nu, u)
    corners = np.array([[sx, sy, sz] for sx in (-r, r) for sy in (-r, r) for sz in (-r, r)])
    pts = []
    for i in range(8):
        for j in range(i + 1, 8):
            if np.count_nonzero(corners[i] != corners[j]) != 1:
                continue
            a, b = corners[i] @ nu, corners[j] @ nu
            if (a <= 0 <= b) or (b <= 0 <= a):
                if a == b:
                    continue
                t = a / (a - b)
                pts.append(corners[i] + t * (corners[j] - corners[i]))
    pts = np.array(pts)
    st = np.stack([pts @ u, pts @ w], axis=1)
    c = st.mean(axis=0)
    order = np.argsort(np.arctan2(st[:, 1] - c[1], st[:, 0] - c[0]))
    st = st[order]
    keep = np.ones(len(st), bool)
    keep[1:] = np.linalg.norm(np.diff(st, axis=0), axis=1) > 1e-14 * r
    return st[keep], u, w


def plane_average_finite(f: PeriodicField, z, direction, epsilon: float, r: float,
                         ppw: int = 16, k: int = 4) -> float:
    """Mean of g(z, y/eps) over the hyperplane through z normal to ``direction``,
    clipped to the cube {|y_i - z_i| < r}.

    n = 2 integrates along the clipped segment with kink splitting; n = 3 uses
    a tensor rule on the polygonal cross-section, normalized by its area.
    """
    if r <= 0 or epsilon <= 0:
        raise DomainError("need r > 0 and epsilon > 0")
    nu = np.asarray(direction.vector if isinstance(direction, Direction) else direction, dtype=float)
    nu = nu / np.linalg.norm(nu)
    z = np.asarray(z, dtype=float)
    h = epsilon / ppw
    if nu.size == 2:
        tau = np.array([-nu[1], nu[0]])
        smax = r / np.max(np.abs(tau))

        def ys(s):
            return (z + np.asarray(s)[..., None] * tau) / epsilon

        def xs(s):
            return np.broadcast_to(z, np.shape(s) + (2,))

        kinks = [f.kink_function(i, xs, ys) for i in range(f.kink_count)]
        edges = uniform_edges(-smax, smax, math.ceil(2 * smax / h))
        return float(integrate_panels(edges, lambda s: f(xs(s), ys(s)), k, kinks)) / (2 * smax)
    if nu.size != 3:
        raise DomainError("plane averages need n in {2, 3}")
    poly, u, w = _plane_section(z, nu, r)
    cuts = np.unique(poly[:, 0])
    total = 0.0
    area = 0.0
    nxt = np.roll(poly, -1, axis=0)
    for a, b in zip(cuts[:-1], cuts[1:]):
        s, ws = composite_rule(uniform_edges(a, b, math.ceil((b - a) / h)), k)
        lo_e, hi_e = poly[:, 0], nxt[:, 0]
        span = (np.minimum(lo_e, hi_e)[None, :] <= s[:, None]) & (np.maximum(lo_e, hi_e)[None, :] >= s[:, None]) & (lo_e != hi_e)[None, :]
        frac = (s[:, None] - lo_e[None, :]) / np.where(hi_e != lo_e, hi_e - lo_e, 1.0)[None, :]
        tv = poly[:, 1][None, :] + frac * (nxt[:, 1] - poly[:, 1])[None, :]
        t_lo = np.where(span, tv, np.inf).min(axis=1)
        t_hi = np.where(span, tv, -np.inf).max(axis=1)
        nt = max(1, math.ceil(np.max(t_hi - t_lo) / h))
        tn, tw = composite_rule(uniform_edges(0.0, 1.0, nt), k)
        T = t_lo[:, None] + (t_hi - t_lo)[:, None] * tn[None, :]
        W = ws[:, None] * (t_hi - t_lo)[:, None] * tw[None, :]
        Y = z + s[:, None, None] * u + T[..., None] * w
        vals = f(np.broadcast_to(z, Y.shape), Y / epsilon)
        total += float(np.sum(vals * W))
        area += float(np.sum(W))
    return total / area
