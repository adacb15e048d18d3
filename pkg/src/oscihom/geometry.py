"""Directions, their rational/irrational classification, and planar curves.

Rationality of a floating-point direction is only decidable relative to a
denominator bound Q and a tolerance: a unit vector is ``rational`` when some
coprime integer vector m with max|m_i| <= Q satisfies |nu - m/|m|| <= tol.
When no such m exists but an approximant is suspiciously good,
|nu - m/|m|| * |m|^(n/(n-1)) <= promotion_margin, the direction is reported
``undetermined`` instead of being silently called irrational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np

from . import expression as ex
from .errors import DomainError
from .quadrature import composite_rule, gauss_legendre, uniform_edges

DEFAULT_Q = 10_000
DEFAULT_TOL = 1e-9
PROMOTION_MARGIN = 1e-6
FLAT_THRESHOLD = 1e-12
JOIN_TOL = 1e-12
FD_STEP = 1e-6

RATIONAL = "rational"
IRRATIONAL = "irrational"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Direction:
    nu: tuple
    kind: str
    m: tuple | None = None
    denom_bound: int = DEFAULT_Q
    tol: float = DEFAULT_TOL
    distance: float | None = None

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def vector(self):
        return np.array(self.nu)

    @property
    def is_rational(self):
        return self.kind == RATIONAL

    @property
    def is_irrational(self):
        return self.kind == IRRATIONAL

    @property
    def is_undetermined(self):
        return self.kind == UNDETERMINED


def _chord(nu, m):
    m = np.asarray(m, dtype=float)
    return float(np.linalg.norm(nu - m / np.linalg.norm(m)))


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction with the smallest denominator in [lo, hi], 0 <= lo <= hi."""
    fl = lo.numerator // lo.denominator
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / _simplest_between(1 / (hi - fl), 1 / (lo - fl))


def convergents(x: Fraction):
    """Continued-fraction convergents p/q of a non-negative rational x."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield Fraction(p1, q1)
        num, den = den, r


def _classify_plane(nu, Q, tol, margin):
    a, b = nu
    swap = abs(b) > abs(a)
    big, small = (abs(b), abs(a)) if swap else (abs(a), abs(b))
    s = small / big
    # tolerance cone in angle, mapped to an interval of slopes
    tau = math.tan(min(2.0 * math.asin(min(tol / 2.0, 1.0)), math.pi / 4)) * (1.0 - 1e-12)

    def to_m(p, q):
        # p/q approximates small/big; restore signs and axis order
        sa = 1 if a >= 0 else -1
        sb = 1 if b >= 0 else -1
        return (sa * p, sb * q) if swap else (sa * q, sb * p)

    lo = max((s - tau) / (1.0 + s * tau), 0.0)
    hi = (s + tau) / (1.0 - s * tau) if s * tau < 1.0 else 2.0
    cand = min(_simplest_between(Fraction(lo), Fraction(hi)), Fraction(1))
    if cand.denominator <= Q:
        m = to_m(cand.numerator, cand.denominator)
        d = _chord(nu, m)
        if d <= tol:
            return RATIONAL, m, d
    best = None
    for c in convergents(Fraction(s)):
        if c.denominator > Q:
            break
        m = to_m(c.numerator, c.denominator)
        d = _chord(nu, m)
        if d * (c.numerator ** 2 + c.denominator ** 2) <= margin and (best is None or d < best[1]):
            best = (m, d)
    if best is not None:
        return UNDETERMINED, best[0], best[1]
    return IRRATIONAL, None, None


def _classify_space(nu, Q, tol, margin):
    """Exhaustive search over the largest component's integer multiple."""
    j = int(np.argmax(np.abs(nu)))
    ratios = nu / abs(nu[j])
    q = np.arange(1, Q + 1, dtype=float)
    others = [i for i in range(len(nu)) if i != j]
    lows = [np.floor(ratios[i] * q) for i in others]
    best_rat = None
    best_und = None
    for combo in range(1 << len(others)):
        m = np.empty((Q, len(nu)))
        m[:, j] = np.sign(nu[j]) * q
        for bit, i in enumerate(others):
            m[:, i] = lows[bit] + ((combo >> bit) & 1)
        mn = np.linalg.norm(m, axis=1)
        d = np.linalg.norm(nu[None, :] - m / mn[:, None], axis=1)
        ok = np.nonzero(d <= tol)[0]
        if ok.size and (best_rat is None or ok[0] < best_rat[0]):
            best_rat = (ok[0], m[ok[0]], d[ok[0]])
        quality = d * mn ** (len(nu) / (len(nu) - 1))
        good = np.nonzero(quality <= margin)[0]
        if good.size:
            k = good[np.argmin(d[good])]
            if best_und is None or d[k] < best_und[2]:
                best_und = (k, m[k], d[k])
    for found, kind in ((best_rat, RATIONAL), (best_und, UNDETERMINED)):
        if found is not None:
            mi = [int(v) for v in found[1]]
            g = reduce(math.gcd, (abs(v) for v in mi))
            return kind, tuple(v // g for v in mi), float(found[2])
    return IRRATIONAL, None, None


def classify_direction(v, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL,
                       promotion_margin: float = PROMOTION_MARGIN) -> Direction:
    """Normalize ``v`` and decide whether it is a rational direction.

    In the plane the search runs on continued fractions: the simplest
    fraction inside the tolerance cone decides ``rational`` (so the returned
    m has the smallest max|m_i| among admissible vectors) and convergents
    decide ``undetermined``. In R^3 every denominator up to Q is scanned.

    >>> classify_direction((3, 4), Q=10).m
    (3, 4)
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size not in (2, 3):
        raise DomainError("directions live in R^2 or R^3")
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        raise DomainError("cannot classify the zero vector")
    if Q < 1 or tol < 0:
        raise DomainError("need Q >= 1 and tol >= 0")
    nu = v / norm
    if v.size == 2:
        kind, m, d = _classify_plane(nu, int(Q), float(tol), promotion_margin)
    else:
        kind, m, d = _classify_space(nu, int(Q), float(tol), promotion_margin)
    return Direction(tuple(float(c) + 0.0 for c in nu), kind, m, int(Q), float(tol), d)


# ---------------------------------------------------------------- curves


class Piece:
    """Parametric piece on t in [0, 1]."""

    kind = "piece"

    def point(self, t):
        raise NotImplementedError

    def tangent(self, t):
        """Unit tangent."""
        raise NotImplementedError

    def speed(self, t):
        raise NotImplementedError

    @property
    def length(self) -> float:
        raise NotImplementedError

    def arclength(self, t):
        """Arclength from t = 0 to t."""
        return np.asarray(t, dtype=float) * self.length

    def param_at_arclength(self, s):
        return np.asarray(s, dtype=float) / self.length

    def panel_edges(self, h: float):
        """Parameter edges of panels whose arclength does not exceed h."""
        return uniform_edges(0.0, 1.0, math.ceil(self.length / h))

    @property
    def is_flat(self) -> bool:
        return False

    def curvature(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @property
    def start(self):
        return self.point(np.array(0.0))

    @property
    def end(self):
        return self.point(np.array(1.0))


@dataclass(frozen=True, eq=False)
class LineSegment(Piece):
    p0: tuple
    p1: tuple
    kind = "line"

    def __post_init__(self):
        object.__setattr__(self, "p0", tuple(float(c) for c in self.p0))
        object.__setattr__(self, "p1", tuple(float(c) for c in self.p1))
        if self.length <= 0:
            raise DomainError("line segment has zero length")

    @cached_property
    def _d(self):
        return np.subtract(self.p1, self.p0)

    @cached_property
    def length(self):
        return float(np.hypot(*self._d))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self.p0) + t[..., None] * self._d

    def tangent(self, t):
        return np.broadcast_to(self._d / self.length, np.shape(t) + (2,))

    def speed(self, t):
        return np.full(np.shape(t), self.length)

    @property
    def is_flat(self):
        return True


@dataclass(frozen=True, eq=False)
class Arc(Piece):
    center: tuple
    radius: float
    angle0: float
    angle1: float
    kind = "arc"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0 or self.angle0 == self.angle1:
            raise DomainError("arc needs positive radius and nonzero sweep")

    @property
    def length(self):
        return abs(self.radius * (self.angle1 - self.angle0))

    def _theta(self, t):
        return self.angle0 + np.asarray(t, dtype=float) * (self.angle1 - self.angle0)

    def point(self, t):
        th = self._theta(t)
        return np.asarray(self.center) + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def tangent(self, t):
        th = self._theta(t)
        sgn = 1.0 if self.angle1 > self.angle0 else -1.0
        return sgn * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def speed(self, t):
        return np.full(np.shape(t), self.length)

    def curvature(self, t):
        sgn = 1.0 if self.angle1 > self.angle0 else -1.0
        return np.full(np.shape(t), sgn / self.radius)


class Graph(Piece):
    """Piece y = phi(x) traversed from x = a to x = b (a > b runs backwards)."""

    kind = "graph"
    _TABLE = 512

    def __init__(self, expr: str, a: float, b: float, dexpr: str | None = None):
        if a == b:
            raise DomainError("graph piece needs a != b")
        self.expr, self.dexpr = expr, dexpr
        self.a, self.b = float(a), float(b)
        self._phi = ex.parse(expr, ex.GRAPH_VARIABLES)
        self._dphi = None if dexpr is None else ex.parse(dexpr, ex.GRAPH_VARIABLES)
        # cumulative arclength table for inversion and panel sizing
        edges = uniform_edges(0.0, 1.0, self._TABLE)
        t, w = composite_rule(edges, 8)
        seg = (self.speed(t) * w).reshape(self._TABLE, 8).sum(axis=1)
        self._t_table = edges
        self._s_table = np.concatenate([[0.0], np.cumsum(seg)])

    def _eval(self, tree, xv):
        xv = np.asarray(xv, dtype=float)
        out = ex.evaluate(tree, {"x": xv, "x1": xv}, self.expr)
        return np.broadcast_to(np.asarray(out, dtype=float), xv.shape)

    def phi(self, xv):
        return self._eval(self._phi, xv)

    def dphi(self, xv):
        if self._dphi is not None:
            return self._eval(self._dphi, xv)
        return (self.phi(xv + FD_STEP) - self.phi(xv - FD_STEP)) / (2 * FD_STEP)

    def _x(self, t):
        return self.a + np.asarray(t, dtype=float) * (self.b - self.a)

    def point(self, t):
        xv = self._x(t)
        return np.stack([xv, self.phi(xv)], axis=-1)

    def tangent(self, t):
        d = self.dphi(self._x(t))
        sgn = 1.0 if self.b > self.a else -1.0
        nrm = np.sqrt(1 + d * d)
        return sgn * np.stack([1 / nrm, d / nrm], axis=-1)

    def speed(self, t):
        d = self.dphi(self._x(t))
        return abs(self.b - self.a) * np.sqrt(1 + d * d)

    def curvature(self, t):
        xv = self._x(t)
        d = self.dphi(xv)
        d2 = (self.dphi(xv + FD_STEP) - self.dphi(xv - FD_STEP)) / (2 * FD_STEP)
        sgn = 1.0 if self.b > self.a else -1.0
        return sgn * d2 / (1 + d * d) ** 1.5

    @cached_property
    def length(self):
        return float(self._s_table[-1])

    def arclength(self, t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self._t_table, t, side="right") - 1, 0, self._TABLE - 1)
        t0 = self._t_table[i]
        x, w = gauss_legendre(8)
        half = 0.5 * (t - t0)
        nodes = t0[..., None] + half[..., None] * (x + 1)
        return self._s_table[i] + np.sum(self.speed(nodes) * w, axis=-1) * half

    def param_at_arclength(self, s):
        s = np.asarray(s, dtype=float)
        t = np.interp(s, self._s_table, self._t_table)
        for _ in range(3):
            t = np.clip(t - (self.arclength(t) - s) / self.speed(t), 0.0, 1.0)
        return t

    def panel_edges(self, h: float):
        n = math.ceil(self.length / h)
        return self.param_at_arclength(np.linspace(0.0, self.length, n + 1))

    @cached_property
    def is_flat(self):
        d = self.dphi(self._x(np.linspace(0.0, 1.0, 257)))
        return float(np.ptp(d)) < FLAT_THRESHOLD


def _rotate(tangent, orientation):
    t = np.asarray(tangent)
    if orientation == "cw":
        return np.stack([t[..., 1], -t[..., 0]], axis=-1)
    return np.stack([-t[..., 1], t[..., 0]], axis=-1)


@dataclass(frozen=True)
class Curve:
    """Piecewise-C1 planar curve.

    ``orientation`` fixes the normal: ``"cw"`` rotates the tangent clockwise,
    which is the outward normal of a counterclockwise boundary; ``"ccw"``
    rotates it counterclockwise.
    """

    segments: tuple
    orientation: str = "cw"
    name: str = ""

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise DomainError("curve has no segments")
        if self.orientation not in ("cw", "ccw"):
            raise DomainError("orientation must be 'cw' or 'ccw'")
        for i in range(len(segs) - 1):
            gap = np.linalg.norm(segs[i].end - segs[i + 1].start)
            if gap > JOIN_TOL:
                raise DomainError(f"segments {i} and {i + 1} do not join (gap {gap:.3e})")
        for s in segs:
            if not s.length > 0:
                raise DomainError("segment with non-positive length")

    @property
    def closed(self) -> bool:
        return bool(np.linalg.norm(self.segments[-1].end - self.segments[0].start) <= JOIN_TOL)

    @cached_property
    def piece_lengths(self):
        return np.array([s.length for s in self.segments])

    @property
    def length(self) -> float:
        return float(np.sum(self.piece_lengths))

    @cached_property
    def offsets(self):
        return np.concatenate([[0.0], np.cumsum(self.piece_lengths)])

    def normal(self, index: int, t):
        return _rotate(self.segments[index].tangent(t), self.orientation)

    @cached_property
    def signed_area(self) -> float:
        """Shoelace area of a closed curve (positive when counterclockwise)."""
        pts, _, w, tang = self._nodes(self.length / 256, 8)
        return 0.5 * float(np.sum((pts[:, 0] * tang[:, 1] - pts[:, 1] * tang[:, 0]) * w))

    def _nodes(self, h_max, k):
        P, T, W = [], [], []
        for seg in self.segments:
            t, w = composite_rule(seg.panel_edges(h_max), k)
            P.append(seg.point(t))
            T.append(seg.tangent(t))
            W.append(w * seg.speed(t))
        P, T, W = np.concatenate(P), np.concatenate(T), np.concatenate(W)
        return P, _rotate(T, self.orientation), W, T

    def at_arclength(self, s):
        """Points, unit tangents and piece indices at global arclength s."""
        s = np.asarray(s, dtype=float)
        if self.closed:
            s = np.mod(s, self.length)
        idx = np.clip(np.searchsorted(self.offsets, s, side="right") - 1, 0, len(self.segments) - 1)
        pts = np.empty(s.shape + (2,))
        tan = np.empty(s.shape + (2,))
        for i, seg in enumerate(self.segments):
            sel = idx == i
            if np.any(sel):
                t = seg.param_at_arclength(s[sel] - self.offsets[i])
                pts[sel] = seg.point(t)
                tan[sel] = seg.tangent(t)
        return pts, tan, idx


def quadrature_nodes(c: Curve, h_max: float, k: int = 8):
    """Composite Gauss-Legendre nodes on ``c`` with panels of arclength <= h_max.

    Returns ``(points, normals, weights)``; the weights sum to the arclength.
    """
    if h_max <= 0:
        raise DomainError("h_max must be positive")
    pts, nrm, w, _ = c._nodes(h_max, k)
    return pts, nrm, w


@dataclass(frozen=True)
class FlatPart:
    first: int
    last: int
    direction: Direction
    length: float

    @property
    def segment_range(self):
        return range(self.first, self.last + 1)


@dataclass(frozen=True)
class FlatDecomposition:
    parts: tuple
    total_length: float
    residual: float
    rational_length: float
    undetermined_length: float

    @property
    def iddc_holds(self) -> bool:
        return self.rational_length == 0.0


def _flat_normal(c: Curve, i: int):
    seg = c.segments[i]
    if not seg.is_flat:
        return None
    return c.normal(i, np.array(0.5))


def flat_decomposition(c: Curve, Q: int = DEFAULT_Q, tol: float = DEFAULT_TOL) -> FlatDecomposition:
    """Maximal straight sub-parts of ``c`` with their classified normals.

    Consecutive flat pieces sharing a normal (within 1e-12) are merged; on a
    closed curve the last and first runs merge across the seam.
    """
    nrm = [_flat_normal(c, i) for i in range(len(c.segments))]
    runs = []
    for i, v in enumerate(nrm):
        if v is None:
            continue
        if runs and runs[-1][1] == i - 1 and np.linalg.norm(nrm[runs[-1][0]] - v) < FLAT_THRESHOLD:
            runs[-1][1] = i
        else:
            runs.append([i, i])
    if (c.closed and len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == len(c.segments) - 1
            and np.linalg.norm(nrm[0] - nrm[-1]) < FLAT_THRESHOLD):
        first = runs.pop(0)
        runs[-1][1] = first[1] + len(c.segments)
    parts = []
    for a, b in runs:
        idx = [j % len(c.segments) for j in range(a, b + 1)]
        length = float(sum(c.segments[j].length for j in idx))
        parts.append(FlatPart(a, b, classify_direction(nrm[a], Q, tol), length))
    flat_len = sum(p.length for p in parts)
    total = c.length
    rat = sum(p.length for p in parts if p.direction.is_rational)
    und = sum(p.length for p in parts if p.direction.is_undetermined)
    return FlatDecomposition(tuple(parts), total, total - flat_len, float(rat), float(und))


# ---------------------------------------------------------------- builders


def polygon(vertices, orientation="cw", name="polygon") -> Curve:
    v = [tuple(p) for p in vertices]
    segs = [LineSegment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    return Curve(tuple(segs), orientation, name)


def circle(center=(0.0, 0.0), radius=1.0, name="circle") -> Curve:
    return Curve((Arc(tuple(center), radius, 0.0, 2 * math.pi),), "cw", name)


def stadium(R: float = 2.0) -> Curve:
    """Boundary of {|x1| < R, |x2| <= 1 + sqrt(R^2 - x1^2)}, counterclockwise.

    Two vertical flats {x1 = +-R} x [-1, 1] joined tangentially by
    half circles of radius R centred at (0, +-1).
    """
    segs = (
        LineSegment((R, -1.0), (R, 1.0)),
        Arc((0.0, 1.0), R, 0.0, math.pi),
        LineSegment((-R, 1.0), (-R, -1.0)),
        Arc((0.0, -1.0), R, math.pi, 2 * math.pi),
    )
    return Curve(segs, "cw", f"stadium(R={R:g})")


def rotated_square(angle: float, half_side: float = 1.0, center=(0.0, 0.0)) -> Curve:
    c, s = math.cos(angle), math.sin(angle)
    base = [(1, -1), (1, 1), (-1, 1), (-1, -1)]
    verts = [(center[0] + half_side * (c * x - s * y), center[1] + half_side * (s * x + c * y)) for x, y in base]
    return polygon(verts, "cw", f"square(angle={angle:.6g})")


def segment(p0, p1, orientation="cw") -> Curve:
    return Curve((LineSegment(tuple(p0), tuple(p1)),), orientation, "segment")


def curve_from_dict(doc: dict) -> Curve:
    """Build a curve from its JSON form (see README for the schema)."""
    if not isinstance(doc, dict):
        raise DomainError("curve must be a JSON object")
    unknown = set(doc) - {"segments", "orientation", "name"}
    if unknown:
        raise DomainError(f"unknown curve keys: {sorted(unknown)}")
    segs = []
    allowed = {
        "line": {"kind", "p0", "p1"},
        "arc": {"kind", "center", "radius", "angle0", "angle1"},
        "graph": {"kind", "expr", "a", "b", "dexpr"},
    }
    for i, s in enumerate(doc.get("segments", [])):
        kind = s.get("kind")
        if kind not in allowed:
            raise DomainError(f"segment {i}: unknown kind {kind!r}")
        extra = set(s) - allowed[kind]
        if extra:
            raise DomainError(f"segment {i}: unknown keys {sorted(extra)}")
        try:
            if kind == "line":
                segs.append(LineSegment(tuple(s["p0"]), tuple(s["p1"])))
            elif kind == "arc":
                segs.append(Arc(tuple(s["center"]), float(s["radius"]), float(s["angle0"]), float(s["angle1"])))
            else:
                segs.append(Graph(s["expr"], float(s["a"]), float(s["b"]), s.get("dexpr")))
        except KeyError as err:
            raise DomainError(f"segment {i}: missing key {err.args[0]!r}") from None
    return Curve(tuple(segs), doc.get("orientation", "cw"), doc.get("name", ""))


def curve_to_dict(c: Curve) -> dict:
    segs = []
    for s in c.segments:
        if isinstance(s, LineSegment):
            segs.append({"kind": "line", "p0": list(s.p0), "p1": list(s.p1)})
        elif isinstance(s, Arc):
            segs.append({"kind": "arc", "center": list(s.center), "radius": s.radius,
                         "angle0": s.angle0, "angle1": s.angle1})
        else:
            d = {"kind": "graph", "expr": s.expr, "a": s.a, "b": s.b}
            if s.dexpr is not None:
                d["dexpr"] = s.dexpr
            segs.append(d)
    return {"segments": segs, "orientation": c.orientation}
