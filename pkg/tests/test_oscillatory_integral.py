import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscihom import (AccuracyError, BudgetError, DomainError, PeriodicField, circle, rotated_square,
                     segment, stadium)
from oscihom.geometry import Arc, Curve
from oscihom.oscillatory_integral import (Geometric, PhaseTargeted, covering_diagnostic, epsilon_sweep,
                                          homogenized_bounds, phase_epsilons, run_sweep, sandwich_check,
                                          surface_integral, surface_integral_report)

SQRT2 = math.sqrt(2.0)
G = PeriodicField("abs(sin(pi*y1)*sin(pi*y2))")
SIN2 = PeriodicField("sin(2*pi*y1)^2")
LAYERED = PeriodicField("abs(sin(pi*y1))^3+0.5*cos(2*pi*y1)")
IRR_SEGMENT = segment((0.0, 0.0), (-SQRT2 / math.sqrt(3), 1 / math.sqrt(3)))


# ------------------------------------------------------------------ surface integrals


@pytest.mark.parametrize("eps", [0.3, 1e-2, 1e-4])
def test_unit_density_gives_length(eps):
    assert surface_integral(circle(), PeriodicField.constant(1.0), eps) == pytest.approx(2 * math.pi, abs=1e-12)


def test_horizontal_segment_at_half():
    line = segment((0.0, 0.5), (1.0, 0.5))
    # eps = 1e-3 puts y2 = 500 on the loop phase 0
    assert surface_integral(line, G, 1e-3) == pytest.approx(0.0, abs=1e-12)
    # the nearest eps with phase 1/2: 0.5 / eps = 499.5
    eps = phase_epsilons(0.5, (0, 1), 0.5, 1.01e-3, 1)[0]
    assert eps == pytest.approx(1e-3, rel=1e-2)
    assert abs(surface_integral(line, G, eps) - 2 / math.pi) <= 1e-3


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.7])
def test_horizontal_segment_integer_periods(a):
    k = 400
    v = surface_integral(segment((0.0, a), (1.0, a)), G, 1.0 / k)
    # 1/eps = k full periods, and y2 = a k has phase a k mod 1
    assert v == pytest.approx(2 / math.pi * abs(math.sin(math.pi * a * k)), abs=1e-10)


def test_irrational_segment(oracle):
    assert IRR_SEGMENT.length == pytest.approx(1.0)
    v = surface_integral(IRR_SEGMENT, G, 1e-3)
    assert abs(v - oracle["abs_sin_sin_cell_average"]) <= 1e-2


def test_circle_matches_brute_force_trapezoid(oracle):
    v = surface_integral(circle(), G, 0.003)
    assert v == pytest.approx(oracle["circle_abs_sin_sin_eps_0.003"], rel=1e-8)


def test_report_is_certified():
    rep = surface_integral_report(stadium(2.0), G, 0.01)
    assert rep.certified and rep.rel_change <= 1e-8 and rep.nodes > 0


def test_budget_error():
    with pytest.raises(BudgetError):
        surface_integral(circle(), G, 1e-4, cap=10_000)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("OSCIHOM_NODE_CAP", "1000")
    with pytest.raises(BudgetError):
        surface_integral(circle(), G, 1e-3)


def test_accuracy_error_when_uncertifiable():
    # a weight with unresolved jumps keeps changing under panel doubling
    jumpy = lambda p, s: 1.0 + 1e-3 * np.sign(np.sin(31415.3 * s))
    with pytest.raises(AccuracyError):
        surface_integral(circle(), SIN2, 0.05, weight=jumpy)


def test_preconditions():
    with pytest.raises(DomainError):
        surface_integral(circle(), G, 0.0)
    with pytest.raises(DomainError):
        surface_integral(circle(), G, 0.1, ppw=4)


def test_weight_receives_arclength():
    c = circle()
    v = surface_integral(c, PeriodicField.constant(1.0), 0.1, weight=lambda p, s: s)
    assert v == pytest.approx(2 * math.pi ** 2, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.005, 0.05))
def test_linearity(a, b, eps):
    f, h = "abs(sin(pi*y1)*sin(pi*y2))", "sin(2*pi*y1)^2+x2"
    both = PeriodicField(f"({a!r})*({f})+({b!r})*({h})")
    c = rotated_square(0.3)
    lhs = surface_integral(c, both, eps)
    rhs = a * surface_integral(c, PeriodicField(f), eps) + b * surface_integral(c, PeriodicField(h), eps)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(a) + abs(b)) * 10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 6.0), st.floats(0.005, 0.05))
def test_additivity_over_concatenation(split, eps):
    whole = Curve((Arc((0.3, -0.2), 1.3, 0.0, 2 * math.pi),))
    parts = [Curve((Arc((0.3, -0.2), 1.3, 0.0, split),)), Curve((Arc((0.3, -0.2), 1.3, split, 2 * math.pi),))]
    a = surface_integral(whole, G, eps)
    b = sum(surface_integral(p, G, eps) for p in parts)
    assert abs(a - b) <= 1e-10 * abs(a)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(1, 0), (0, 1), (1, 1), (1, -2)]), st.floats(0, 1), st.integers(1, 5),
       st.integers(-4, 4), st.sampled_from([0.01, 0.003]))
def test_phase_shift_periodicity(m, c, K, j, eps):
    """A flat piece of K whole periods is unchanged when its phase moves by j/|m|."""
    norm = math.hypot(*m)
    nu = np.array(m) / norm
    tau = np.array([-nu[1], nu[0]])
    z = eps * c * nu
    L = K * eps * norm
    shifted = z + eps * j * nu / norm
    a = surface_integral(segment(z, z + L * tau), G, eps)
    b = surface_integral(segment(shifted, shifted + L * tau), G, eps)
    assert abs(a - b) <= 1e-10 * max(L, 1e-3)


# ------------------------------------------------------------------ schedules


def test_geometric_schedule():
    eps, ph = Geometric(0.1, 0.7, 25).epsilons()
    assert ph is None and len(eps) == 25 and eps[0] == 0.1
    assert np.all(np.diff(eps) < 0)
    last = Geometric.ending_at(1e-4, 0.7, 20).epsilons()[0][-1]
    assert last == pytest.approx(1e-4, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3).filter(lambda d: abs(d) > 1e-3), st.sampled_from([(1, 0), (1, 1), (2, 1)]),
       st.floats(0, 0.99), st.floats(1e-4, 1e-2))
def test_phase_epsilons_hit_the_phase(d, m, phase, eps_max):
    norm = math.hypot(*m)
    eps = phase_epsilons(d, m, phase / norm, eps_max, 5)
    assert np.all(np.diff(eps) < 0) and eps[0] <= eps_max * (1 + 1e-12)
    got = np.mod(d / eps, 1 / norm)
    want = (phase / norm) % (1 / norm)
    err = np.minimum(np.abs(got - want), 1 / norm - np.abs(got - want))
    assert np.all(err <= 1e-9 * np.abs(d / eps))


def test_origin_line_only_realizes_phase_zero():
    assert len(phase_epsilons(0.0, (1, 0), 0.0, 1e-2, 3)) == 3
    with pytest.raises(DomainError):
        phase_epsilons(0.0, (1, 0), 0.25, 1e-2, 3)


def test_sweep_rejects_increasing_schedule():
    class Bad:
        def epsilons(self):
            return np.array([0.1, 0.2]), None

    with pytest.raises(DomainError):
        run_sweep(Bad(), lambda e: 1.0)


def test_constant_density_sweep():
    c = stadium(2.0)
    s = epsilon_sweep(c, PeriodicField.constant(5.0), Geometric(0.1, 0.5, 8))
    assert np.allclose(s.values, 5 * c.length, rtol=1e-13)
    assert s.width <= 1e-12 and s.converged


def test_phase_targeted_sub_limits():
    # flat line y2 = 1, so 1/eps sits on the requested loop phase
    c = segment((0.0, 1.0), (1.0, 1.0))
    sched = PhaseTargeted((0.0, 1.0), (0, 1), (0.0, 0.25, 0.5), eps_max=1e-3, per_phase=3)
    s = epsilon_sweep(c, G, sched)
    lim = s.sub_limits()
    assert lim[0.0] == pytest.approx(0.0, abs=1e-3)
    assert lim[0.25] == pytest.approx(SQRT2 / math.pi, abs=1e-3)
    assert lim[0.5] == pytest.approx(2 / math.pi, abs=1e-3)
    assert set(s.sub_sequences()) == {0.0, 0.25, 0.5}


def test_threads_do_not_change_values():
    sched = Geometric(0.05, 0.7, 4)
    a = epsilon_sweep(circle(), G, sched, threads=1)
    b = epsilon_sweep(circle(), G, sched, threads=2)
    assert np.array_equal(a.values, b.values)


# ------------------------------------------------------------------ bounds


def test_circle_bounds_collapse(oracle):
    b = homogenized_bounds(circle(), G)
    ref = oracle["circle_effective_limit"]
    assert b.iddc_holds and not b.flagged
    for v in (b.lower, b.mean, b.upper):
        assert v == pytest.approx(ref, abs=1e-8)


def test_stadium_bounds_from_flat_loops(oracle):
    c = stadium(2.0)
    b = homogenized_bounds(c, G)
    gbar = oracle["abs_sin_sin_cell_average"]
    flat = 4.0
    assert b.mean == pytest.approx(c.length * gbar, abs=1e-8)
    assert b.upper == pytest.approx(b.mean + flat * (2 / math.pi - gbar), abs=1e-8)
    assert b.lower == pytest.approx(b.mean - flat * gbar, abs=1e-8)
    assert b.upper > b.mean
    assert sorted(p.kind for p in b.parts) == ["curved", "curved", "flat_rational", "flat_rational"]


def test_slab_face_bounds_per_unit_length():
    b = homogenized_bounds(segment((1.0, -0.5), (1.0, 0.5)), SIN2)
    assert b.upper == pytest.approx(1.0, abs=1e-10)
    assert b.lower == pytest.approx(0.0, abs=1e-10)
    assert b.mean == pytest.approx(0.5, abs=1e-12)


def test_bounds_ordering_with_slow_dependence():
    f = PeriodicField("(1+x2^2)*sin(2*pi*y1)^2")
    b = homogenized_bounds(stadium(2.0), f, h=0.5)
    assert b.lower <= b.mean <= b.upper
    assert b.upper - b.mean == pytest.approx(2 * (2 + 2 / 3) * 0.5, abs=1e-8)


def test_undetermined_flat_is_flagged():
    c = segment((0.0, 0.0), (1.0, -1.0 - 2e-8))
    b = homogenized_bounds(c, G)
    assert b.flagged and b.lower <= b.mean <= b.upper


# ------------------------------------------------------------------ sandwich


@pytest.fixture(scope="module")
def circle_sweep():
    return epsilon_sweep(circle(), G, Geometric(0.1, 0.7, 25), W=6)


def test_circle_sweep_center(circle_sweep, oracle):
    assert abs(circle_sweep.center - oracle["circle_effective_limit"]) <= 1e-2


def test_circle_sweep_converged(circle_sweep):
    assert circle_sweep.converged


def test_circle_sandwich(circle_sweep):
    b = homogenized_bounds(circle(), G)
    v = sandwich_check(circle_sweep, b, 2e-2)
    assert v.passed
    lo, hi = circle_sweep.band
    assert b.mean - 2e-2 <= lo and hi <= b.mean + 2e-2


def test_stadium_argmax_subsequence_reaches_upper_bound():
    c = stadium(2.0)
    b = homogenized_bounds(c, SIN2)
    s = epsilon_sweep(c, SIN2, PhaseTargeted((2.0, 0.0), (1, 0), (0.25,), eps_max=3e-4, per_phase=4), W=4)
    assert abs(s.band[1] - b.upper) <= 2e-2


def test_constant_sandwich_is_exact():
    c = rotated_square(0.4)
    f = PeriodicField.constant(2.0)
    s = epsilon_sweep(c, f, Geometric(0.1, 0.5, 6))
    v = sandwich_check(s, homogenized_bounds(c, f))
    nums = [*v.band, *v.bounds]
    assert v.passed and max(nums) - min(nums) <= 1e-12


def test_sandwich_reports_failure():
    c = segment((0.0, 0.5), (1.0, 0.5))
    s = epsilon_sweep(c, G, Geometric(0.01, 0.7, 4))
    b = homogenized_bounds(segment((0.0, 0.5), (1.0, 0.5)), PeriodicField.constant(0.0))
    v = sandwich_check(s, b)
    assert not v.passed and v.upper_gap < -0.5


# ------------------------------------------------------------------ covering


def test_covering_diagnostic_on_circle(oracle):
    sp, cubes = covering_diagnostic(circle(), G, 1e-3, max_cubes=16)
    assert sp.M == pytest.approx(math.sqrt(1e3)) and sp.rho == pytest.approx(1e-3 * sp.M)
    assert len(cubes) == 16
    inside = sum(cb.inside for cb in cubes)
    assert inside >= 12
