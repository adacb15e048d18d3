"""Dirichlet and Neumann problems with rapidly oscillating boundary data.

Disk problems use the closed-form Poisson kernel and Green function; slabs
use the closed-form homogenized profiles together with the strip Poisson
kernel for finite eps; general closed curves use the Nyström solvers of
:mod:`oscihom.bem`. Oscillating data always enter through the oscillation
resolving surface quadrature, weighted by the relevant kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .averaging import directional_triple
from .bem import DEFAULT_PANELS, DoubleLayer, SingleLayer
from .errors import ConditioningError, DomainError
from .geometry import Curve, Direction, circle, classify_direction, flat_decomposition
from .oscillatory_integral import DEFAULT_PPW, surface_integral, surface_integral_report
from .periodic_field import PeriodicField, cell_average
from .quadrature import composite_rule, integrate_panels, uniform_edges

BOUNDARY_MARGIN = 1e-6
STRIP_TRUNCATION = 12.0
GREEN_PANELS_PER_DIST = 4
SLAB_A_NAMES = ("upper", "lower", "mean", "energy")


@dataclass(frozen=True)
class Disk:
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    @property
    def curve(self) -> Curve:
        return circle(self.center, self.radius)


@dataclass(frozen=True)
class Slab:
    """{-R1 < x . nu < R2}: datum M on the lower face, g(x, x/eps) on the upper face.

    ``A`` selects the subsequence limit on the upper face when the face normal
    is rational: a number in [min g, max g] or one of ``"upper"``,
    ``"lower"``, ``"mean"``, ``"energy"`` (M clamped to [min g, max g]).
    """

    nu: tuple
    R1: float = 1.0
    R2: float = 1.0
    M: float = 0.0
    A: object = "mean"

    @property
    def unit(self):
        v = np.asarray(self.nu.vector if isinstance(self.nu, Direction) else self.nu, dtype=float)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Bem:
    curve: Curve
    panels: int = DEFAULT_PANELS


@dataclass(frozen=True)
class InteriorMeasure:
    """Measure f(y, y/eps) dsigma carried by a curve strictly inside the domain."""

    curve: Curve
    density: PeriodicField


@dataclass(frozen=True)
class DirichletProblem:
    domain: object
    g: PeriodicField
    epsilon: float
    measure: InteriorMeasure | None = None
    ppw: int = DEFAULT_PPW


# ---------------------------------------------------------------- kernels


def disk_poisson_kernel(center, radius, x, y):
    """(R^2 - |x - c|^2) / (2 pi R |x - y|^2)."""
    c = np.asarray(center, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (radius**2 - np.sum((x - c) ** 2, axis=-1)) / (2 * np.pi * radius * np.sum((x - y) ** 2, axis=-1))


def disk_green(center, radius, x, y):
    """Green function of -Laplace on the disk with zero boundary values."""
    c = np.asarray(center, dtype=float)
    xr = np.asarray(x, dtype=float) - c
    yr = np.asarray(y, dtype=float) - c
    d2 = np.sum((xr - yr) ** 2, axis=-1)
    img = np.sum(xr**2, axis=-1) * np.sum(yr**2, axis=-1) / radius**2 - 2 * np.sum(xr * yr, axis=-1) + radius**2
    return -np.log(d2 / img) / (4 * np.pi)


def log_kernel(x, y):
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    return -np.log(np.sum(d * d, axis=-1)) / (4 * np.pi)


def strip_poisson_kernel(H, s, dt):
    """Kernel of the face {s = H} of the strip 0 < s < H; integrates to s / H."""
    a = math.pi * s / H
    return np.sin(a) / (2 * H * (np.cosh(np.pi * np.asarray(dt) / H) + np.cos(a)))


# ---------------------------------------------------------------- helpers


def _point(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DomainError("evaluation point must have two coordinates")
    return x


def _distance_to(c: Curve, x, samples: int = 4096):
    pts, _, _ = c.at_arclength(np.linspace(0.0, c.length, samples, endpoint=False))
    return float(np.min(np.linalg.norm(pts - x, axis=-1)))


def _measure_term(meas: InteriorMeasure, green, x, epsilon, ppw):
    dist = _distance_to(meas.curve, x)
    if dist < BOUNDARY_MARGIN:
        raise DomainError("evaluation point lies on the interior measure's support")
    weight = lambda pts, s: green(pts)
    rep = surface_integral_report(meas.curve, meas.density, epsilon, ppw, weight=weight,
                                  h_max=dist / GREEN_PANELS_PER_DIST)
    return rep.value


# ---------------------------------------------------------------- disk


def solve_disk(p: DirichletProblem, x) -> float:
    """u_eps(x) = int P(x, y) g(y, y/eps) dsigma + int_Gamma0 G(x, y) f(y, y/eps) dsigma."""
    dom = p.domain
    x = _point(x)
    r = float(np.linalg.norm(x - np.asarray(dom.center)))
    if r >= dom.radius * (1 - BOUNDARY_MARGIN):
        raise ConditioningError(f"point at radius {r:.9g} is too close to the boundary of radius {dom.radius}")
    dist = dom.radius - r
    weight = lambda pts, s: disk_poisson_kernel(dom.center, dom.radius, x, pts)
    u = surface_integral_report(dom.curve, p.g, p.epsilon, p.ppw, weight=weight,
                                h_max=dist / GREEN_PANELS_PER_DIST).value
    if p.measure is not None:
        u += _measure_term(p.measure, lambda pts: disk_green(dom.center, dom.radius, x, pts),
                           x, p.epsilon, p.ppw)
    return float(u)


# ---------------------------------------------------------------- slab


def slab_constant(slab: Slab, g: PeriodicField) -> float:
    """Homogenized value A on the upper face."""
    nu = slab.unit
    d = classify_direction(nu)
    tri = directional_triple(g, nu * slab.R2, d)
    if tri.width <= 1e-12 or not d.is_rational:
        return tri.mean
    lo, hi = tri.lower, tri.upper
    A = slab.A
    if isinstance(A, str):
        if A == "upper":
            return hi
        if A == "lower":
            return lo
        if A == "mean":
            return tri.mean
        if A == "energy":
            return min(max(slab.M, lo), hi)
        raise DomainError(f"unknown slab constant {A!r}; use a number or one of {SLAB_A_NAMES}")
    A = float(A)
    if not lo - 1e-12 <= A <= hi + 1e-12:
        raise DomainError(f"A = {A} outside the attainable interval [{lo}, {hi}]")
    return A


def _slab_coordinate(slab: Slab, x):
    s = float(np.dot(_point(x), slab.unit)) + slab.R1
    H = slab.R1 + slab.R2
    if not 0.0 < s < H:
        raise DomainError("point lies outside the slab")
    return s, H


def solve_slab(p: DirichletProblem, x) -> float:
    """Homogenized profile u = M + (A - M)(x . nu + R1)/(R1 + R2)."""
    slab = p.domain
    s, H = _slab_coordinate(slab, x)
    A = slab_constant(slab, p.g)
    return slab.M + (A - slab.M) * s / H


def solve_slab_eps(p: DirichletProblem, x) -> float:
    """Finite-eps slab solution through the strip Poisson kernel.

    The upper face integral is truncated at |t - t0| <= 12 H, where the kernel
    has decayed below 1e-16 of its peak.
    """
    slab = p.domain
    x = _point(x)
    s, H = _slab_coordinate(slab, x)
    nu = slab.unit
    tau = np.array([-nu[1], nu[0]])
    t0 = float(np.dot(x, tau))
    base = slab.R2 * nu

    def pts(t):
        return base + np.asarray(t)[..., None] * tau

    def ys(t):
        return pts(t) / p.epsilon

    half = STRIP_TRUNCATION * H
    g = p.g
    h = min(p.epsilon / p.ppw, H / 64) if g.oscillates else H / 64
    edges = uniform_edges(t0 - half, t0 + half, math.ceil(2 * half / h))
    kinks = [g.kink_function(j, pts, ys) for j in range(g.kink_count)] if g.oscillates else []
    top = integrate_panels(edges, lambda t: strip_poisson_kernel(H, s, t - t0) * g(pts(t), ys(t)), 4, kinks)
    return float(slab.M * (1 - s / H) + top)


# ---------------------------------------------------------------- general curves


@lru_cache(maxsize=8)
def dirichlet_operator(curve: Curve, panels: int = DEFAULT_PANELS) -> DoubleLayer:
    return DoubleLayer(curve, panels)


@lru_cache(maxsize=8)
def neumann_operator(curve: Curve, panels: int = DEFAULT_PANELS) -> SingleLayer:
    return SingleLayer(curve, panels)


def bem_green(op: DoubleLayer, x, pts):
    """Domain Green function G(x, y) = Phi(x, y) - H_x(y) at points ``pts``."""
    x = _point(x)
    phi = op.density(log_kernel(x, op.points))
    pts = np.asarray(pts, dtype=float)
    flat = pts.reshape(-1, 2)
    out = np.empty(len(flat))
    for s in range(0, len(flat), 4096):
        out[s : s + 4096] = op.potential(flat[s : s + 4096], phi)
    return log_kernel(x, pts) - out.reshape(pts.shape[:-1])


def solve_bem(p: DirichletProblem, x, direct: bool | None = None) -> float:
    """u_eps(x) on the interior of a closed curve.

    ``direct`` samples g on the Nyström mesh (right for data that the mesh
    resolves); otherwise the discrete Poisson kernel at x is integrated
    against g(y, y/eps) by the oscillation resolving quadrature. The default
    is direct for non-oscillating data.
    """
    dom = p.domain
    op = dirichlet_operator(dom.curve, dom.panels)
    x = _point(x)
    if direct is None:
        direct = not p.g.oscillates
    if direct:
        u = float(op.solve(p.g(op.points, op.points / p.epsilon), x)[0])
    else:
        u = surface_integral(dom.curve, p.g, p.epsilon, p.ppw, weight=op.poisson_kernel(x))
    if p.measure is not None:
        u += _measure_term(p.measure, lambda pts: bem_green(op, x, pts), x, p.epsilon, p.ppw)
    return float(u)


def solve(p: DirichletProblem, x) -> float:
    if isinstance(p.domain, Disk):
        return solve_disk(p, x)
    if isinstance(p.domain, Slab):
        return solve_slab(p, x)
    if isinstance(p.domain, Bem):
        return solve_bem(p, x)
    raise DomainError(f"unknown domain {type(p.domain).__name__}")


# ---------------------------------------------------------------- homogenized data


def boundary_curve(domain) -> Curve:
    if isinstance(domain, Disk):
        return domain.curve
    if isinstance(domain, Bem):
        return domain.curve
    raise DomainError("piecewise data need a disk or curve domain")


def homogenized_datum(curve: Curve, g: PeriodicField, which: str = "mean", phases: int = 256):
    """Per-piece callables ``points -> values`` of the lower/mean/upper averages.

    Pieces on flat parts with a non-irrational normal carry loop extremes;
    all other points carry the cell average.
    """
    if which not in ("lower", "mean", "upper"):
        raise DomainError("which must be 'lower', 'mean' or 'upper'")
    dec = flat_decomposition(curve)
    nseg = len(curve.segments)
    special = {}
    for part in dec.parts:
        if not part.direction.is_irrational:
            for j in part.segment_range:
                special[j % nseg] = part.direction
    out = []
    for i in range(nseg):
        d = special.get(i)
        if d is None:
            out.append(lambda pts: np.atleast_1d(cell_average(g, np.asarray(pts).reshape(-1, 2))))
        elif g.depends_on_x:
            out.append(lambda pts, d=d: np.array([getattr(directional_triple(g, q, d, phases), which)
                                                  for q in np.asarray(pts).reshape(-1, 2)]))
        else:
            val = getattr(directional_triple(g, np.zeros(2), d, phases), which)
            out.append(lambda pts, val=val: np.full(len(np.asarray(pts).reshape(-1, 2)), val))
    return out


def _curve_rule(c: Curve, h: float, k: int = 8):
    rules = []
    for i, seg in enumerate(c.segments):
        t, w = composite_rule(seg.panel_edges(h), k)
        pts = seg.point(t)
        rules.append((pts, c.offsets[i] + seg.arclength(t), w * seg.speed(t)))
    return rules


def solve_with_datum(domain, datum, x, h: float = 0.02, f_bar=None, gamma0: Curve | None = None) -> float:
    """Solution at x for piecewise boundary data ``datum`` (one callable per piece).

    ``f_bar`` (a callable on points) with ``gamma0`` adds the source term
    int_Gamma0 G(x, y) f_bar(y) dsigma.
    """
    x = _point(x)
    c = boundary_curve(domain)
    if len(datum) != len(c.segments):
        raise DomainError("datum needs one callable per boundary piece")
    if isinstance(domain, Disk):
        dist = domain.radius - float(np.linalg.norm(x - np.asarray(domain.center)))
        if dist <= domain.radius * BOUNDARY_MARGIN:
            raise ConditioningError("point too close to the boundary")
        kern = lambda pts, s: disk_poisson_kernel(domain.center, domain.radius, x, pts)
        green = lambda pts: disk_green(domain.center, domain.radius, x, pts)
        h = min(h, dist / GREEN_PANELS_PER_DIST)
    else:
        op = dirichlet_operator(domain.curve, domain.panels)
        kern = op.poisson_kernel(x)
        green = lambda pts: bem_green(op, x, pts)
    u = 0.0
    for (pts, s, w), fn in zip(_curve_rule(c, h), datum):
        u += float(np.sum(kern(pts, s) * fn(pts) * w))
    if f_bar is not None:
        if gamma0 is None:
            raise DomainError("a source density needs its support curve")
        dist = _distance_to(gamma0, x)
        for pts, s, w in _curve_rule(gamma0, min(h, dist / GREEN_PANELS_PER_DIST)):
            u += float(np.sum(green(pts) * f_bar(pts) * w))
    return u


def homogenized_solution(p: DirichletProblem, x, which: str = "mean") -> float:
    """Solve with datum lower/mean/upper averages and source cell average of f."""
    if isinstance(p.domain, Slab):
        slab = p.domain
        A = {"upper": "upper", "lower": "lower", "mean": "mean"}[which]
        return solve_slab(DirichletProblem(Slab(slab.nu, slab.R1, slab.R2, slab.M, A), p.g, p.epsilon), x)
    c = boundary_curve(p.domain)
    datum = homogenized_datum(c, p.g, which)
    f_bar = gamma0 = None
    if p.measure is not None:
        dens = p.measure.density
        f_bar = lambda pts: np.atleast_1d(cell_average(dens, np.asarray(pts).reshape(-1, 2)))
        gamma0 = p.measure.curve
    return solve_with_datum(p.domain, datum, x, f_bar=f_bar, gamma0=gamma0)


# ---------------------------------------------------------------- Neumann


COMPATIBILITY_TOL = 1e-8


def neumann_defect(curve: Curve, f: PeriodicField, epsilon: float, ppw: int = DEFAULT_PPW) -> float:
    return surface_integral(curve, f, epsilon, ppw)


def solve_neumann(curve: Curve, f: PeriodicField, epsilon: float, x, panels: int = DEFAULT_PANELS,
                  ppw: int = DEFAULT_PPW, direct: bool | None = None) -> float:
    """Interior Neumann solution with datum f(y, y/eps), normalized to zero boundary mean.

    Raises :class:`DomainError` when |int f(y, y/eps) dsigma| exceeds 1e-8.
    """
    defect = neumann_defect(curve, f, epsilon, ppw)
    if abs(defect) > COMPATIBILITY_TOL:
        raise DomainError(f"incompatible Neumann datum: boundary integral {defect:.3e} exceeds {COMPATIBILITY_TOL:g}")
    op = neumann_operator(curve, panels)
    x = _point(x)
    if direct is None:
        direct = not f.oscillates
    if direct:
        return float(op.solve(f(op.points, op.points / epsilon), x)[0])
    return float(surface_integral(curve, f, epsilon, ppw, weight=op.neumann_kernel(x)))
