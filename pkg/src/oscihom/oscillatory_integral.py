"""Surface integrals of g(y, y/eps) over planar curves, eps-sweeps and limit bands.

The integrals are computed by composite Gauss-Legendre in each piece's
parameter with panels no longer than eps/ppw in arclength, split at the kinks
of ``abs`` terms, and certified by doubling ppw. The homogenized bounds
integrate the directional triple along the curve: loop extremes on flat
rational parts, the cell average elsewhere.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .averaging import directional_triple, scale_pair
from .errors import AccuracyError, BudgetError, DomainError
from .geometry import DEFAULT_Q, DEFAULT_TOL, Curve, classify_direction, flat_decomposition
from .periodic_field import PeriodicField, cell_average
from .quadrature import composite_rule, integrate_panels

NODE_CAP = 10**8
DEFAULT_PPW = 16
PANEL_ORDER = 4
CERTIFY_RTOL = 1e-8
MAX_DOUBLINGS = 3
SMOOTH_PANELS = 64
TAIL_WINDOW = 6
TOL_CONV = 1e-2
BOUNDS_H = 0.05


def node_cap() -> int:
    env = os.environ.get("OSCIHOM_NODE_CAP")
    return int(float(env)) if env else NODE_CAP


@dataclass(frozen=True)
class IntegralReport:
    value: float
    epsilon: float
    ppw: int
    nodes: int
    certified: bool
    rel_change: float


def _panel_width(c: Curve, f: PeriodicField, epsilon: float, ppw: int) -> float:
    if f.oscillates:
        return epsilon / ppw
    return min(c.length, 1.0) / SMOOTH_PANELS * 16 / ppw


def _integrate_once(c: Curve, f: PeriodicField, epsilon: float, h: float, k: int, weight, cap: int):
    panels = sum(math.ceil(L / h) for L in c.piece_lengths)
    if panels * k > cap:
        raise BudgetError(f"surface integral at eps={epsilon:.3e} needs {panels * k} nodes, cap is {cap}")
    total = 0.0
    for i, seg in enumerate(c.segments):
        off = c.offsets[i]

        def ys(t, seg=seg):
            return seg.point(t) / epsilon

        kinks = [f.kink_function(j, seg.point, ys) for j in range(f.kink_count)] if f.oscillates else []

        def integrand(t, seg=seg, off=off):
            p = seg.point(t)
            v = f(p, p / epsilon) * seg.speed(t)
            if weight is not None:
                v = v * weight(p, off + seg.arclength(t))
            return v

        total += integrate_panels(seg.panel_edges(h), integrand, k, kinks)
    return float(total), panels * k


def surface_integral_report(c: Curve, f: PeriodicField, epsilon: float, ppw: int = DEFAULT_PPW,
                            weight=None, k: int = PANEL_ORDER, certify: bool = True,
                            rtol: float = CERTIFY_RTOL, cap: int | None = None,
                            h_max: float | None = None) -> IntegralReport:
    """Certified quadrature of the oscillating surface integral.

    ``weight`` is an optional callable ``weight(points, s)`` multiplying the
    integrand, with ``s`` the global arclength of each node. With ``certify``
    the panel density is doubled until two successive values agree to
    ``rtol`` relative (at most three doublings). ``h_max`` caps the panel
    length at the starting ppw, for weights with a narrow peak.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if ppw < 8:
        raise DomainError("ppw must be at least 8")
    cap = node_cap() if cap is None else cap
    ppw0 = ppw

    def width(ppw):
        w = _panel_width(c, f, epsilon, ppw)
        return w if h_max is None else min(w, h_max * ppw0 / ppw)

    value, nodes = _integrate_once(c, f, epsilon, width(ppw), k, weight, cap)
    if not certify:
        return IntegralReport(value, epsilon, ppw, nodes, False, math.nan)
    for _ in range(MAX_DOUBLINGS):
        ppw *= 2
        finer, more = _integrate_once(c, f, epsilon, width(ppw), k, weight, cap)
        change = abs(finer - value) / max(1.0, abs(finer))
        nodes += more
        value = finer
        if change <= rtol:
            return IntegralReport(value, epsilon, ppw, nodes, True, change)
    raise AccuracyError(f"surface integral at eps={epsilon:.3e} changed by {change:.2e} at ppw={ppw}")


def surface_integral(c: Curve, f: PeriodicField, epsilon: float, ppw: int = DEFAULT_PPW, **kw) -> float:
    """Integral of g(y, y/eps) over ``c`` with respect to arclength."""
    return surface_integral_report(c, f, epsilon, ppw, **kw).value


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class Geometric:
    eps0: float
    ratio: float = 0.7
    count: int = 25

    def epsilons(self):
        if not (self.eps0 > 0 and 0 < self.ratio < 1 and self.count >= 1):
            raise DomainError("geometric schedule needs eps0 > 0, 0 < ratio < 1, count >= 1")
        return self.eps0 * self.ratio ** np.arange(self.count), None

    @classmethod
    def ending_at(cls, eps_min: float, ratio: float = 0.7, count: int = 20):
        return cls(eps_min / ratio ** (count - 1), ratio, count)


def phase_epsilons(d: float, m, phase: float, eps_max: float, count: int):
    """Decreasing eps with (d/eps) = phase mod 1/|m|, the largest <= eps_max.

    ``d`` is the signed offset z . nu of the flat part. For d = 0 only phase 0
    is reachable and any eps realizes it.
    """
    norm = math.hypot(*m) if len(m) == 2 else float(np.linalg.norm(m))
    period = 1.0 / norm
    phase = phase % period
    if d == 0.0:
        if min(phase, period - phase) > 1e-12:
            raise DomainError("a flat part through the origin only realizes phase 0")
        return eps_max * np.arange(1, count + 1, dtype=float) ** -1.0
    a = abs(d)
    shift = phase if d > 0 else -phase
    # d/eps = phase + k/|m|  (d > 0)   or   |d|/eps = k/|m| - phase  (d < 0)
    k0 = math.ceil((a / eps_max - shift) * norm)
    while (shift + k0 * period) <= 0:
        k0 += 1
    k = np.arange(k0, k0 + count, dtype=float)
    return a / (shift + k * period)


@dataclass(frozen=True)
class PhaseTargeted:
    """eps values that put the scaled flat part {y . nu = d} on chosen loop phases."""

    z: tuple
    m: tuple
    phases: tuple
    eps_max: float = 0.01
    per_phase: int = 4

    def epsilons(self):
        m = np.asarray(self.m, dtype=float)
        d = float(np.dot(self.z, m / np.linalg.norm(m)))
        eps, lab = [], []
        for ph in self.phases:
            e = phase_epsilons(d, self.m, float(ph), self.eps_max, self.per_phase)
            eps.extend(e)
            lab.extend([float(ph)] * len(e))
        order = np.argsort(-np.asarray(eps), kind="stable")
        eps = np.asarray(eps)[order]
        lab = np.asarray(lab)[order]
        keep = np.concatenate([[True], np.diff(eps) < 0])
        return eps[keep], lab[keep]


@dataclass(frozen=True)
class EpsilonSweep:
    epsilons: np.ndarray
    values: np.ndarray
    tail_window: int
    tol_conv: float
    phases: np.ndarray | None = None
    reports: tuple = field(default=(), repr=False)

    @property
    def band(self):
        tail = self.values[-self.tail_window:]
        return float(np.min(tail)), float(np.max(tail))

    @property
    def width(self) -> float:
        lo, hi = self.band
        return hi - lo

    @property
    def center(self) -> float:
        lo, hi = self.band
        return 0.5 * (lo + hi)

    @property
    def converged(self) -> bool:
        return self.width < self.tol_conv

    def sub_limits(self) -> dict:
        """Value at the smallest eps for every targeted phase."""
        if self.phases is None:
            return {}
        out = {}
        for e, v, p in zip(self.epsilons, self.values, self.phases):
            out[float(p)] = float(v)
        return out

    def sub_sequences(self) -> dict:
        if self.phases is None:
            return {}
        out = {}
        for e, v, p in zip(self.epsilons, self.values, self.phases):
            out.setdefault(float(p), []).append((float(e), float(v)))
        return out


def run_sweep(schedule, evaluate, W: int = TAIL_WINDOW, tol_conv: float = TOL_CONV, threads: int = 1):
    """Evaluate ``evaluate(eps)`` over a schedule; returns an :class:`EpsilonSweep`.

    ``evaluate`` may return a float or an object with a ``value`` attribute.
    """
    eps, phases = schedule.epsilons()
    eps = np.asarray(eps, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise DomainError("epsilon schedule must be strictly decreasing")
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            res = list(pool.map(evaluate, eps))
    else:
        res = [evaluate(e) for e in eps]
    values = np.array([getattr(r, "value", r) for r in res], dtype=float)
    if not np.all(np.isfinite(values)):
        raise AccuracyError("non-finite value in sweep")
    reps = tuple(r for r in res if isinstance(r, IntegralReport))
    return EpsilonSweep(eps, values, min(W, len(eps)), tol_conv, phases, reps)


def epsilon_sweep(c: Curve, f: PeriodicField, schedule, ppw: int = DEFAULT_PPW, W: int = TAIL_WINDOW,
                  tol_conv: float = TOL_CONV, threads: int = 1, weight=None) -> EpsilonSweep:
    """Surface integrals along an eps schedule with the tail band of the last W values."""
    return run_sweep(schedule, lambda e: surface_integral_report(c, f, e, ppw, weight=weight),
                     W, tol_conv, threads)


# ---------------------------------------------------------------- bounds


@dataclass(frozen=True)
class PartBound:
    kind: str
    segments: tuple
    length: float
    lower: float
    mean: float
    upper: float
    m: tuple | None = None
    flagged: bool = False


@dataclass(frozen=True)
class HomogenizedBounds:
    lower: float
    mean: float
    upper: float
    parts: tuple
    iddc_holds: bool

    @property
    def flagged(self) -> bool:
        return any(p.flagged for p in self.parts)


def _segment_nodes(c: Curve, i: int, h: float):
    seg = c.segments[i]
    t, w = composite_rule(seg.panel_edges(h), 8)
    return seg.point(t), w * seg.speed(t)


def homogenized_bounds(c: Curve, f: PeriodicField, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL,
                       h: float = BOUNDS_H, phases: int = 256) -> HomogenizedBounds:
    """Integrals of (lower, mean, upper) directional averages along ``c``.

    Flat parts with a rational (or undetermined) normal contribute loop
    extremes; every other point contributes the cell average. When g does
    not depend on x the triple is constant along a flat part and computed
    once.
    """
    if f.n != 2:
        raise DomainError("homogenized bounds are computed for planar curves")
    dec = flat_decomposition(c, Q, tol)
    nseg = len(c.segments)
    special = {}
    for part in dec.parts:
        if not part.direction.is_irrational:
            for j in part.segment_range:
                special[j % nseg] = part
    parts = []
    for i in range(nseg):
        seg = c.segments[i]
        part = special.get(i)
        if part is None:
            if f.depends_on_x:
                pts, w = _segment_nodes(c, i, h)
                mean = float(np.sum(cell_average(f, pts) * w))
            else:
                mean = cell_average(f) * seg.length
            kind = "flat_irrational" if seg.is_flat else "curved"
            parts.append(PartBound(kind, (i,), seg.length, mean, mean, mean))
            continue
        d = part.direction
        if f.depends_on_x:
            pts, w = _segment_nodes(c, i, h)
            tr = [directional_triple(f, p, d, phases) for p in pts]
            lo = float(sum(t.lower * wi for t, wi in zip(tr, w)))
            me = float(sum(t.mean * wi for t, wi in zip(tr, w)))
            up = float(sum(t.upper * wi for t, wi in zip(tr, w)))
        else:
            t = directional_triple(f, np.zeros(2), d, phases)
            lo, me, up = (v * seg.length for v in (t.lower, t.mean, t.upper))
        kind = "flat_rational" if d.is_rational else "flat_undetermined"
        parts.append(PartBound(kind, (i,), seg.length, lo, me, up, d.m, d.is_undetermined))
    lower = math.fsum(p.lower for p in parts)
    mean = math.fsum(p.mean for p in parts)
    upper = math.fsum(p.upper for p in parts)
    return HomogenizedBounds(lower, mean, upper, tuple(parts), dec.iddc_holds)


@dataclass(frozen=True)
class SandwichVerdict:
    passed: bool
    band: tuple
    bounds: tuple
    slack: float
    lower_gap: float
    upper_gap: float


def sandwich_check(sweep: EpsilonSweep, bounds: HomogenizedBounds, slack: float = 2e-2) -> SandwichVerdict:
    """Pass iff bounds.lower - slack <= band.lower and band.upper <= bounds.upper + slack."""
    lo, hi = sweep.band
    ok = (bounds.lower - slack <= lo) and (hi <= bounds.upper + slack)
    return SandwichVerdict(bool(ok), (lo, hi), (bounds.lower, bounds.mean, bounds.upper), slack,
                           lo - bounds.lower, bounds.upper - hi)


# ---------------------------------------------------------------- covering diagnostic


@dataclass(frozen=True)
class CubeReport:
    center: tuple
    normal: tuple
    local_average: float
    lower: float
    upper: float

    @property
    def inside(self) -> bool:
        return self.lower - 1e-2 <= self.local_average <= self.upper + 1e-2


def covering_diagnostic(c: Curve, f: PeriodicField, epsilon: float, L: float | None = None,
                        max_cubes: int = 64, ppw: int = DEFAULT_PPW):
    """Local averages over curve pieces of length 2 rho_eps against the local triple.

    Cube centres are spread along the curve at spacing of at least 2 rho so
    the cubes Q_rho(z_j) cover disjoint arcs; ``L`` defaults to the maximal
    curvature (at least 1). Returns ``(ScalePair, [CubeReport, ...])``.
    """
    if L is None:
        kmax = 0.0
        for seg in c.segments:
            kmax = max(kmax, float(np.max(np.abs(seg.curvature(np.linspace(0, 1, 65))))))
        L = max(kmax, 1.0)
    sp = scale_pair(epsilon, L)
    rho = sp.rho
    n = max(1, min(max_cubes, int(c.length // (2 * rho))))
    centres = (np.arange(n) + 0.5) * c.length / n
    out = []
    for s0 in centres:
        edges = np.linspace(s0 - rho, s0 + rho, math.ceil(2 * rho / (epsilon / ppw)) + 1)
        pts_fn = lambda s: c.at_arclength(s)[0]
        kinks = [f.kink_function(j, pts_fn, lambda s: pts_fn(s) / epsilon) for j in range(f.kink_count)]
        val = integrate_panels(edges, lambda s: f(pts_fn(s), pts_fn(s) / epsilon), PANEL_ORDER, kinks)
        p, tan, idx = c.at_arclength(np.array([s0]))
        nrm = c.normal(int(idx[0]), c.segments[int(idx[0])].param_at_arclength(s0 - c.offsets[int(idx[0])]))
        nrm = np.asarray(nrm, dtype=float).reshape(2)
        d = classify_direction(nrm)
        try:
            tr = directional_triple(f, p[0], d)
            lo, hi = tr.lower, tr.upper
        except DomainError:
            lo = hi = cell_average(f, p[0])
        out.append(CubeReport(tuple(p[0]), tuple(nrm), float(val) / (2 * rho), lo, hi))
    return sp, out
