import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expoth.freegroup import reduce
from expoth.lifting import (
    BoundReport,
    ConfigurationError,
    LiftError,
    MonicPolynomial,
    check_lift_bound_composition,
    check_lift_bound_exp,
    check_lift_bound_poly,
    lift_exp,
    lift_poly,
    random_instance_composition,
    random_instance_exp,
    random_instance_poly,
    run_batch,
)
from expoth.rcurve import PunctureSet, RCurve, curve_from_word, homotopy_word, parse_curve

E = math.e


class TestLiftExp:
    def test_real_log(self):
        lift = lift_exp(RCurve(E), 0, 0)
        assert lift.start == 1
        assert all(abs(z.imag) < 1e-15 for z in lift.points)
        assert lift.tail_height == 0

    def test_strip_three(self):
        a, b = lift_exp(RCurve(E), 0, 0), lift_exp(RCurve(E), 0, 3)
        assert b.start == complex(1, 6 * math.pi)
        assert np.array_equal(b.points, a.points + 6j * math.pi)

    def test_shifted_kappa(self):
        assert lift_exp(RCurve(1 + E), 1, 0).start == pytest.approx(1, abs=1e-15)

    def test_too_close(self):
        with pytest.raises(LiftError, match="curve too close to asymptotic value"):
            lift_exp(parse_curve("2; 0.5; -1+1i; tail"), 0.5 + 1e-14j, 0)
        with pytest.raises(LiftError, match="asymptotic"):
            lift_exp(parse_curve("-3; -1-1i; tail"), 4 - 1j, 0)

    def test_tail_lands_in_target_strip(self):
        gamma = parse_curve("3+2i; -2+5i; -4-3i; 1-6i; tail")
        for k in (-2, 0, 1, 4):
            lift = lift_exp(gamma, 0.3 - 0.2j, k)
            h = lift.tail_height
            assert 2 * math.pi * k - math.pi < h <= 2 * math.pi * k + math.pi

    def test_winding_curve_changes_branch(self):
        # the curve winds once counterclockwise around kappa before leaving
        gamma = parse_curve("2; 2+2i; -2+2i; -2-2i; 3-2i; tail")
        lift = lift_exp(gamma, 0, 0)
        # the tail sits in strip 0, so the start is one full turn lower
        assert lift.start == pytest.approx(cmath.log(2) - 2j * math.pi)


@st.composite
def exp_cases(draw):
    k = draw(st.integers(1, 4))
    pts = draw(st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)),
                        min_size=k, max_size=k, unique=True).filter(lambda xs: (0, 0) not in xs))
    V = PunctureSet(tuple([0j] + [complex(a, b) for a, b in pts]))
    s = draw(st.integers(1, len(V) - 1))
    raw = draw(st.lists(st.tuples(st.integers(0, len(V) - 1), st.sampled_from([-1, 1])), max_size=6))
    return V, s, reduce(raw), draw(st.integers(-3, 3))


@settings(max_examples=80, deadline=None)
@given(exp_cases(), st.sampled_from([0j, 0.7 - 0.4j]))
def test_exp_round_trip_and_branch_coherence(case, shift):
    V, s, w, k = case
    kappa = shift
    P = PunctureSet(tuple(v + kappa for v in V))
    gamma = curve_from_word(P, s, w)
    lift = lift_exp(gamma, kappa, k, hazards=P.points)
    back = np.exp(lift.points) + kappa
    # every downstairs vertex is reproduced
    for v in gamma.points:
        assert np.min(np.abs(back - v)) < 1e-9 * (1 + abs(v))
    assert np.max(np.abs(np.exp(lift.points) + kappa - back)) == 0
    base = lift_exp(gamma, kappa, 0, hazards=P.points)
    assert np.array_equal(lift.points, base.points + complex(0, 2 * math.pi * k))


class TestLiftPoly:
    def test_square_root(self):
        p = MonicPolynomial((0, 0))
        lift = lift_poly(RCurve(4), p, 2)
        assert lift.is_r_curve and lift.rotation == 1
        assert np.allclose(lift.raw, np.sqrt(np.abs(lift.raw) ** 2))
        assert np.allclose(lift.raw ** 2, np.abs(lift.raw) ** 2)

    def test_negative_branch(self):
        lift = lift_poly(RCurve(4), MonicPolynomial((0, 0)), -2)
        assert not lift.is_r_curve
        assert lift.rotation == -1
        assert np.all(lift.raw.real < 0)
        assert lift.curve.start == 2

    def test_shifted_square(self):
        lift = lift_poly(RCurve(2), MonicPolynomial((-2, 0)), 2)
        w = lift.raw ** 2 - 2
        assert np.allclose(lift.raw, np.sqrt(w + 2), rtol=1e-12)

    def test_r_curve_lift_found(self):
        p = MonicPolynomial((1 - 1j, 0.5j, -1))
        gamma = parse_curve("3+3i; -4+2i; 0-5i; tail")
        lift = lift_poly(gamma, p, None)
        assert lift.is_r_curve
        assert abs(complex(p(lift.curve.start)) - gamma.start) < 1e-9

    def test_critical_value_on_path(self):
        p = MonicPolynomial((0, 0))
        with pytest.raises(LiftError, match="critical value on path"):
            lift_poly(parse_curve("-1; 1; tail"), p, 1j)

    def test_bad_start(self):
        with pytest.raises(LiftError):
            lift_poly(RCurve(4), MonicPolynomial((0, 0)), 3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 10_000))
    def test_round_trip(self, d, seed):
        rng = np.random.default_rng(seed)
        p = MonicPolynomial(tuple(rng.uniform(-2, 2, d) + 1j * rng.uniform(-2, 2, d)))
        cv = list(p.critical_values())
        pts = [complex(*rng.uniform(-6, 6, 2)) for _ in range(3)]
        V = PunctureSet(tuple(cv + pts)) if len(set(cv)) == len(cv) else PunctureSet(tuple(pts))
        s = len(V) - 1
        gamma = curve_from_word(V, s, reduce([(0, 1), (1, -1)]))
        z0 = p.preimages(gamma.start)[int(rng.integers(d))]
        lift = lift_poly(gamma, p, z0, hazards=V.points)
        back = p(lift.raw)
        for v in gamma.points:
            assert np.min(np.abs(back - v)) < 1e-9 * (1 + abs(v))
        assert abs(lift.rotation ** d - 1) < 1e-12


class TestBoundFormulas:
    def test_exp_n1(self):
        rep = check_lift_bound_exp(PunctureSet((0, 5)), PunctureSet((math.log(5),)),
                                   RCurve(5), RCurve(math.log(5)))
        assert (rep.n, rep.m, rep.bound) == (2, 0, 24)

    def test_formula_instances(self):
        assert BoundReport("exp", 1, 0, 0, 6 * 1 * 1 * (0 + 1)).bound == 6
        assert BoundReport("exp", 2, 1, 0, 6 * 4 * 2).bound == 48
        assert 6 * 2 * 2 ** 2 * (0 + 1) == 48
        assert 42 * 1 * 2 ** 4 * (0 + 1) == 672
        assert 42 * 2 * 2 ** 4 * (1 + 1) == 2688

    def test_exp_instance_m1(self):
        V = PunctureSet((0, 5))
        gamma = curve_from_word(V, 1, reduce([(0, 1)]))
        lift = lift_exp(gamma, 0, 0, hazards=V.points)
        rep = check_lift_bound_exp(V, PunctureSet((lift.start,)), gamma, lift)
        assert (rep.n, rep.m, rep.bound) == (2, 1, 48)
        assert rep.ok

    def test_poly_d2(self):
        p = MonicPolynomial((0, 0))
        V = PunctureSet((0, 4))
        gamma = RCurve(4)
        lift = lift_poly(gamma, p, None, hazards=V.points)
        rep = check_lift_bound_poly(V, PunctureSet((0, lift.curve.start)), gamma, lift.curve, p)
        assert (rep.n, rep.m, rep.bound, rep.d) == (2, 0, 48, 2)
        assert rep.ok

    def test_affine(self):
        p = MonicPolynomial((3 - 1j,))
        V = PunctureSet((1, 2j))
        gamma = curve_from_word(V, 0, reduce([(1, 1), (0, -1)]))
        lift = lift_poly(gamma, p, None, hazards=V.points)
        Vt = PunctureSet((lift.curve.start, 2j - (3 - 1j)))
        rep = check_lift_bound_poly(V, Vt, gamma, lift.curve, p)
        assert rep.bound == 6 * 4 * (2 + 1) and rep.ok
        # translation preserves the homotopy word
        assert rep.w_tilde == rep.m

    def test_composition_small(self):
        p = MonicPolynomial((1,))        # p(0) = 1, no critical values
        V = PunctureSet((1, 3))
        gamma = RCurve(3)
        delta = lift_poly(gamma, p, None, hazards=V.points).curve
        lift = lift_exp(delta, 0, 0, hazards=(2,))
        rep = check_lift_bound_composition(V, PunctureSet((lift.start,)), gamma, lift, p)
        assert (rep.n, rep.m, rep.bound) == (2, 0, 672)

    def test_configuration_errors(self):
        with pytest.raises(ConfigurationError):
            check_lift_bound_exp(PunctureSet((1, 5)), PunctureSet((0j,)), RCurve(5), RCurve(0))
        with pytest.raises(ConfigurationError):
            check_lift_bound_poly(PunctureSet((1, 4)), PunctureSet((1, 2)), RCurve(4), RCurve(2),
                                  MonicPolynomial((0, 0)))

    def test_report_line(self):
        assert BoundReport("exp", 2, 1, 3, 48).line() == "2 1 3 48 PASS"
        assert BoundReport("exp", 2, 1, 48, 48).line() == "2 1 48 48 FAIL"


@pytest.mark.parametrize("gen", [random_instance_exp, random_instance_poly, random_instance_composition])
def test_random_instances_deterministic(gen):
    assert gen(5, 17) == gen(5, 17)


def test_batch_small():
    for fam in ("exp", "poly", "composition"):
        reps = run_batch(fam, 40, 11)
        assert all(r.ok for r in reps)


def test_batch_parallel_matches_serial():
    assert run_batch("exp", 24, 3, jobs=2) == run_batch("exp", 24, 3)
