import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from expoth.address import ExternalAddress, growth, parse_address, shift
from expoth.spider import solve
from expoth.verify import (
    auto_depth,
    depth_profile,
    forward_orbit_check,
    ray_csv,
    ray_rows,
    real_axis_oracle,
    real_potential,
    trace_ray,
    tract_index,
    verify_parameter,
)
from oracle_values import KAPPA_ZEROS, T_STAR

ZEROS = ExternalAddress.zeros()


class TestTraceRay:
    def test_seed(self):
        assert trace_ray(0, ZEROS, 50, 0) == 50 + 0j

    @pytest.mark.parametrize("t", [30.0, 35.0, 40.0, 50.0])
    def test_asymptotics(self, t):
        assert abs(trace_ray(0, ZEROS, t, 1) - t) < math.exp(-t / 2)

    def test_solved_parameter_on_ray(self):
        a = parse_address("|gen:thue_morse")
        res = solve(a, 1.5)
        assert abs(trace_ray(res.kappa, a, 1.5, res.plan.N) - res.kappa) < 1e-9

    def test_errors(self):
        with pytest.raises(ValueError):
            trace_ray(0, ZEROS, 50, 2)      # seed saturates
        with pytest.raises(ValueError):
            trace_ray(0, ZEROS, 1.0, 1)     # seed below min_seed
        with pytest.raises(ValueError):
            trace_ray(0, ZEROS, -1.0, 0)

    def test_pullback_hits_kappa(self):
        t = 3.0
        seed = growth(growth(t))
        with pytest.raises(ArithmeticError):
            trace_ray(complex(seed, 0), ZEROS, t, 2)

    def test_depth_stability(self):
        k = KAPPA_ZEROS[1.0]
        d = depth_profile(k, ZEROS, 1.0, [3, 4], min_seed=30)
        assert d[0] < 1e-12
        diffs = depth_profile(0.2 + 0.1j, parse_address("|gen:fibonacci"), 0.3, range(6, 10), min_seed=1)
        assert all(b < a for a, b in zip(diffs, diffs[1:]))


@pytest.mark.parametrize("kappa", [0j, 0.5 + 0.3j, -1 + 1j])
@pytest.mark.parametrize("t", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("lit", ["0|zeros", "|gen:thue_morse", "2,1|gen:champernowne3"])
def test_shift_equivariance(kappa, t, lit):
    a = parse_address(lit)
    d = auto_depth(t, 30)
    lhs = trace_ray(kappa, shift(a, 1), growth(t), d - 1)
    rhs = cmath.exp(trace_ray(kappa, a, t, d)) + kappa
    assert abs(lhs - rhs) < 1e-8 * max(1, abs(lhs))


class TestVerifyParameter:
    def test_solved(self):
        a = parse_address("1,0|gen:digitsum3")
        res = solve(a, 2.5)
        assert verify_parameter(res.kappa, a, 2.5, res.plan.N) < 1e-6
        assert verify_parameter(res.kappa + 1e-2, a, 2.5, res.plan.N) > 1e-4

    def test_seed(self):
        assert verify_parameter(50, ZEROS, 50, 0) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_grows_away_from_fixed_point(self, dx, dy):
        k = KAPPA_ZEROS[2.0]
        delta = 1e-3 * complex(dx, dy)
        if abs(delta) < 1e-5:
            return
        assert verify_parameter(k + delta, ZEROS, 2.0, 2) > verify_parameter(k, ZEROS, 2.0, 2)


class TestForward:
    def test_decreasing_in_trusted_window(self):
        res = solve(ZEROS, 1.5)
        fc = forward_orbit_check(res.kappa, ZEROS, 1.5, 6)
        w = fc.trusted
        assert w >= 3
        assert all(b < a for a, b in zip(fc.residuals[:w], fc.residuals[1:w]))

    def test_kappa0(self):
        assert forward_orbit_check(0, ZEROS, 1.0, 3).residuals[0] == 1.0

    def test_wrong_address(self):
        a = parse_address("|gen:thue_morse")
        res = solve(a, 2.5)
        wrong = parse_address("0,2|gen:thue_morse@2")
        fc = forward_orbit_check(res.kappa, wrong, 2.5, 3)
        assert fc.residuals[1] >= 2 * math.pi - 0.1
        assert fc.tracts[1] == a.entry(1)

    def test_immediate_overflow(self):
        fc = forward_orbit_check(0, ZEROS, 800.0, 3)
        assert fc.saturated_at is not None


class TestRealOracle:
    @pytest.mark.parametrize("t", sorted(KAPPA_ZEROS))
    def test_values(self, t):
        assert real_axis_oracle(t) == pytest.approx(KAPPA_ZEROS[t], abs=1e-13)

    def test_round_trip_kappa0(self):
        assert real_potential(0.0) == pytest.approx(T_STAR, abs=1e-14)
        assert abs(real_axis_oracle(T_STAR)) < 1e-13

    def test_monotone(self):
        ks = [real_axis_oracle(t) for t in (0.5, 0.9, 1.4, 2.0, 3.3, 6.0)]
        assert all(a < b for a, b in zip(ks, ks[1:]))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.5, 8))
    def test_inverse(self, t):
        assert real_potential(real_axis_oracle(t)) == pytest.approx(t, rel=1e-10)

    def test_deterministic(self):
        assert real_axis_oracle(1.7) == real_axis_oracle(1.7)


def test_tract_index():
    assert tract_index(5 + 2 * math.pi * 3j) == 3
    assert tract_index(1 + 10j) is None


def test_ray_csv():
    rows = ray_rows(0, ZEROS, [50.0], depth=0)
    assert ray_csv(rows) == "50,50.0,0.0\n"
    assert ray_csv([(1.5, 1 + 2j)]) == "1.5,1.0,2.0\n"
