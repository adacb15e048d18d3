"""Composite Gauss-Legendre rules with breakpoint insertion at kinks.

Densities built from ``abs`` have derivative jumps where the argument of the
``abs`` changes sign. Gauss-Legendre panels straddling such a point converge
only algebraically, so :func:`integrate_panels` locates those sign changes
along the path and splits the panels there; every panel then carries a
smooth integrand.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

PANEL_CHUNK = 1 << 15
BISECT_STEPS = 6
SECANT_STEPS = 3


@lru_cache(maxsize=None)
def gauss_legendre(k: int):
    """Nodes and weights on [-1, 1]; arrays are read-only."""
    x, w = np.polynomial.legendre.leggauss(k)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_rule(edges, k: int = 8):
    """Nodes and weights of the k-point rule on every panel between ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(k)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _bisect(lo, hi, fn, iters: int = BISECT_STEPS, secant: int = SECANT_STEPS):
    """Bracketed roots: ``iters`` halvings, then safeguarded secant steps."""
    flo = fn(lo)
    slo = np.sign(flo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sm = np.sign(fn(mid))
        exact = sm == 0
        right = sm == slo
        lo = np.where(right | exact, mid, lo)
        hi = np.where(right & ~exact, hi, mid)
    flo = fn(lo)
    fhi = fn(hi)
    root = 0.5 * (lo + hi)
    for _ in range(secant):
        denom = fhi - flo
        safe = np.abs(denom) > 0
        root = np.where(safe, lo - flo * (hi - lo) / np.where(safe, denom, 1.0), 0.5 * (lo + hi))
        root = np.clip(root, lo, hi)
        fr = fn(root)
        right = np.sign(fr) == np.sign(flo)
        lo, flo = np.where(right, root, lo), np.where(right, fr, flo)
        hi, fhi = np.where(right, hi, root), np.where(right, fhi, fr)
    return root


def _grazing_roots(edges, v, fn, iters: int):
    """Root pairs hidden inside a discrete extremum that stays on one side of zero."""
    if v.size < 3:
        return np.empty(0)
    d0 = v[1:-1] - v[:-2]
    d1 = v[2:] - v[1:-1]
    s = np.sign(v)
    same = (s[:-2] == s[1:-1]) & (s[1:-1] == s[2:]) & (s[1:-1] != 0)
    near = np.abs(v[1:-1]) < 4.0 * np.maximum(np.abs(d0), np.abs(d1))
    idx = np.nonzero((d0 * d1 < 0) & same & near)[0] + 1
    if idx.size == 0:
        return np.empty(0)
    sig = s[idx]
    a = edges[idx - 1].astype(float)
    b = edges[idx + 1].astype(float)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = sig * fn(c)
    fd = sig * fn(d)
    for _ in range(40):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - invphi * (b - a), d)
        d_new = np.where(left, c, a + invphi * (b - a))
        c, d = c_new, d_new
        fc = sig * fn(c)
        fd = sig * fn(d)
    x = 0.5 * (a + b)
    crossed = sig * fn(x) < 0
    if not np.any(crossed):
        return np.empty(0)
    x = x[crossed]
    i = idx[crossed]
    r1 = _bisect(edges[i - 1].astype(float), x, fn, iters)
    r2 = _bisect(x, edges[i + 1].astype(float), fn, iters)
    return np.concatenate([r1, r2])


def locate_sign_changes(edges, fn, iters: int = BISECT_STEPS):
    """Roots of ``fn`` between consecutive ``edges``.

    ``fn`` maps a parameter array to values. Brackets are bisected ``iters``
    times and finished with safeguarded secant steps, so the returned roots
    sit far below the panel width from the true kink. Pairs of roots that fall
    between the same two edges (a kink line grazing the path) are found by
    minimizing |fn| around discrete extrema that come close to zero.
    """
    v = fn(edges)
    s = np.sign(v)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    roots = _bisect(edges[idx].astype(float), edges[idx + 1].astype(float), fn, iters) if idx.size else np.empty(0)
    extra = _grazing_roots(edges, v, fn, iters)
    return np.concatenate([roots, extra]) if extra.size else roots


def refine_edges(edges, kinks=()):
    """Insert the sign changes of each kink function into ``edges``."""
    edges = np.asarray(edges, dtype=float)
    extra = []
    for fn in kinks:
        for start in range(0, edges.size - 1, PANEL_CHUNK):
            sl = edges[start : start + PANEL_CHUNK + 1]
            r = locate_sign_changes(sl, fn)
            if r.size:
                extra.append(r)
    if not extra:
        return edges
    return np.unique(np.concatenate([edges, *extra]))


def integrate_panels(edges, integrand, k: int = 8, kinks=()):
    """Composite Gauss-Legendre integral of ``integrand`` over ``edges``.

    Parameters
    ----------
    edges : array
        Increasing panel boundaries in the path parameter.
    integrand : callable
        Vectorized map from parameter values to integrand values (real or
        complex).
    k : int
        Nodes per panel.
    kinks : sequence of callables
        Functions whose sign changes mark derivative jumps of the integrand.

    Returns
    -------
    value : float or complex
    """
    edges = refine_edges(edges, kinks)
    partial = []
    for start in range(0, edges.size - 1, PANEL_CHUNK):
        sl = edges[start : start + PANEL_CHUNK + 1]
        t, w = composite_rule(sl, k)
        partial.append(np.sum(integrand(t) * w))
    return np.sum(np.array(partial)) if partial else 0.0


def uniform_edges(a: float, b: float, n: int):
    return np.linspace(a, b, max(int(n), 1) + 1)


def golden_section(fn, a: float, b: float, tol: float = 1e-8, maximize: bool = False):
    """Golden-section search for an extremum of a unimodal ``fn`` on [a, b].

    Returns ``(argument, value)``.
    """
    sign = -1.0 if maximize else 1.0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = sign * fn(c)
    fd = sign * fn(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)
