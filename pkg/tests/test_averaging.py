import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscihom import DomainError, PeriodicField, UnsupportedDimensionError
from oscihom.averaging import (DEGENERATE, FOLIATION, RATIONAL_LOOP, directional_triple,
                               plane_average_finite, scale_pair, weyl_average)
from oscihom.geometry import classify_direction
from oscihom.periodic_field import cell_average

SQRT2 = math.sqrt(2.0)
G = PeriodicField("abs(sin(pi*y1)*sin(pi*y2))")
SIN2 = PeriodicField("sin(2*pi*y1)^2")
IRR = classify_direction((1, SQRT2))


# ------------------------------------------------------------------ Weyl sums


def test_weyl_constant():
    w = weyl_average(lambda t: np.ones_like(t), [0.3], 50)
    assert w.value == 1.0 and w.count == 101


def test_weyl_exponential_decays():
    w = weyl_average(lambda t: np.exp(2j * np.pi * t), [SQRT2 - 1], 100_000)
    assert abs(w.value) <= 1e-3
    assert w.error <= 1e-3


def test_weyl_rational_orbit_matches_cyclic_enumeration(oracle):
    h = PeriodicField("sin(2*pi*y1)^2")
    w = weyl_average(h, [1 / 3], 30_000)
    assert w.value == pytest.approx(oracle["orbit_sin2_third"], abs=1e-4)


def test_weyl_rational_failure_is_exhibited(oracle):
    w = weyl_average(lambda t: np.cos(4 * np.pi * t), [0.5], 1000)
    assert w.value == pytest.approx(oracle["orbit_cos4pi_half"], abs=1e-12)
    assert abs(w.target) < 1e-12
    assert w.error > 0.9


def test_weyl_two_dimensional_exact_count():
    w = weyl_average(lambda t: np.ones_like(t), [SQRT2 - 1, math.sqrt(3) - 1], 40)
    assert w.count == 81 ** 2 and not w.sampled


def test_weyl_two_dimensional_sampling_is_labelled_and_seeded():
    h = PeriodicField("abs(sin(pi*y1))")
    a = weyl_average(h, [SQRT2 - 1, math.sqrt(3) - 1], 1000, seed=7)
    b = weyl_average(h, [SQRT2 - 1, math.sqrt(3) - 1], 1000, seed=7)
    assert a.sampled and a.seed == 7 and a.value == b.value
    assert a.error < 5e-3


def test_weyl_rejects_bad_input():
    with pytest.raises(DomainError):
        weyl_average(lambda t: t, [0.1, 0.2, 0.3], 5)
    with pytest.raises(DomainError):
        weyl_average(lambda t: t, [0.1], 0)


# ------------------------------------------------------------------ triples


def test_triple_layered_vertical_loop():
    t = directional_triple(SIN2, np.zeros(2), classify_direction((1, 0)))
    assert t.mechanism == RATIONAL_LOOP and t.m == (1, 0)
    assert t.lower == pytest.approx(0.0, abs=1e-10)
    assert t.upper == pytest.approx(1.0, abs=1e-10)
    assert t.mean == pytest.approx(0.5, abs=1e-12)


def test_triple_irrational_collapses_to_cell_average(oracle):
    t = directional_triple(G, np.zeros(2), IRR)
    assert t.mechanism == FOLIATION
    ref = oracle["abs_sin_sin_cell_average"]
    assert t.lower == t.mean == t.upper == pytest.approx(ref, abs=1e-10)


def test_triple_horizontal_line():
    t = directional_triple(G, np.zeros(2), classify_direction((0, 1)))
    assert t.upper == pytest.approx(2 / math.pi, abs=1e-9)
    assert t.phase_argmax == pytest.approx(0.5, abs=1e-6)
    assert t.lower == pytest.approx(0.0, abs=1e-9)
    assert t.phase_argmin == pytest.approx(0.0, abs=1e-6) or t.phase_argmin == pytest.approx(1.0, abs=1e-6)


def test_triple_undetermined_is_flagged():
    d = classify_direction((1.0, 1.0 + 2e-8))
    t = directional_triple(G, np.zeros(2), d)
    assert t.mechanism == DEGENERATE and t.flagged and t.m == (1, 1)
    assert t.lower <= t.mean <= t.upper


def test_triple_rational_in_space_is_unsupported():
    f = PeriodicField("sin(2*pi*y1)^2", n=3)
    with pytest.raises(UnsupportedDimensionError):
        directional_triple(f, np.zeros(3), classify_direction((1, 0, 0)))


def test_triple_irrational_in_space():
    f = PeriodicField("abs(sin(pi*y1)*sin(pi*y2)*sin(pi*y3))")
    t = directional_triple(f, np.zeros(3), classify_direction((1, SQRT2, math.sqrt(3)), Q=100))
    assert t.width == 0.0 and t.mean == pytest.approx((2 / math.pi) ** 3, abs=1e-9)


DENSITIES = [
    "abs(sin(pi*y1)*sin(pi*y2))",
    "sin(2*pi*y1)^2",
    "abs(sin(pi*y1))^3+0.5*cos(2*pi*y1)",
    "abs(cos(2*pi*y1)-0.3)*(1+0.5*sin(2*pi*y2))",
    "x1+cos(2*pi*(y1+2*y2))",
]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(DENSITIES), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([(1, 0), (0, 1), (1, 1), (2, -1), (1, 3)]))
def test_ordering_rational(text, z1, z2, m):
    f = PeriodicField(text)
    t = directional_triple(f, np.array([z1, z2]), classify_direction(m), phases=64)
    assert t.lower <= t.mean + 1e-8 and t.mean <= t.upper + 1e-8


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(DENSITIES), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 1.5))
def test_foliation_collapse(text, z1, z2, theta):
    f = PeriodicField(text)
    d = classify_direction((math.cos(theta), math.sin(theta)))
    if not d.is_irrational:
        return
    z = np.array([z1, z2])
    t = directional_triple(f, z, d)
    assert t.width <= 1e-6
    assert abs(t.mean - cell_average(f, z)) <= 1e-8


# ------------------------------------------------------------------ scale pair


def test_scale_pair_unit_modulus():
    sp = scale_pair(1e-4, 1.0)
    assert sp.M == pytest.approx(100.0) and sp.rho == pytest.approx(1e-2)


def test_scale_pair_steep_modulus(oracle):
    sp = scale_pair(1e-4, 100.0)
    ref = oracle["scale_pair_1e-4_L100"]
    assert sp.M == pytest.approx(ref["M"], rel=1e-12) and sp.rho == pytest.approx(ref["rho"], rel=1e-12)


def test_scale_pair_coarse():
    sp = scale_pair(0.25, 1.0)
    assert sp.M == pytest.approx(2.0) and sp.rho == pytest.approx(0.5)


def test_scale_pair_bound_is_reported_not_assumed():
    sp = scale_pair(1e-4, 1.0)
    assert sp.lhs == pytest.approx(sp.M * sp.tau(sp.epsilon * sp.M))
    assert sp.rhs == pytest.approx(math.sqrt(sp.tau(math.sqrt(sp.epsilon))))
    assert sp.bound_holds == (sp.lhs <= sp.rhs)


def test_scale_pair_rejects_bad_input():
    with pytest.raises(DomainError):
        scale_pair(1.5, 1.0)
    with pytest.raises(DomainError):
        scale_pair(0.1, 0.0)


# ------------------------------------------------------------------ plane averages


def test_plane_average_constant():
    f = PeriodicField.constant(3.0)
    for eps, r in ((1e-2, 1.0), (0.3, 0.2)):
        assert plane_average_finite(f, np.zeros(2), (1, SQRT2), eps, r) == pytest.approx(3.0, abs=1e-12)
    f3 = PeriodicField.constant(3.0, n=3)
    assert plane_average_finite(f3, np.zeros(3), (1, SQRT2, 0.3), 0.1, 0.5) == pytest.approx(3.0, abs=1e-12)


def test_plane_average_irrational(oracle):
    v = plane_average_finite(G, np.zeros(2), (1, SQRT2), 1e-3, 1.0)
    assert abs(v - oracle["abs_sin_sin_cell_average"]) <= 1e-2


def test_plane_average_irrational_in_space():
    f = PeriodicField("abs(sin(pi*y1)*sin(pi*y2)*sin(pi*y3))")
    v = plane_average_finite(f, np.zeros(3), (1, SQRT2, math.sqrt(3)), 2e-2, 0.5)
    assert abs(v - (2 / math.pi) ** 3) <= 1e-2


@pytest.mark.parametrize("c", [0.0, 0.1, 0.3])
@pytest.mark.parametrize("r", [0.05, 1.0])
def test_plane_average_vertical_line_constant(c, r):
    eps = 1e-2
    v = plane_average_finite(SIN2, np.array([c * eps, 0.0]), (1, 0), eps, r)
    assert v == pytest.approx(math.sin(2 * math.pi * c) ** 2, abs=1e-12)
