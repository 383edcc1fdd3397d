"""Recompute the frozen reference values with mpmath."""
import pytest

from oracle_values import F_50, F_E_MINUS_1, KAPPA_ZEROS, ORBITS, T_STAR

mp = pytest.importorskip("mpmath")


@pytest.fixture(autouse=True)
def precision():
    with mp.workdps(60):
        yield


def test_growth_values():
    assert abs(mp.expm1(mp.e - 1) - F_E_MINUS_1) < 1e-15
    assert abs(mp.expm1(50) / F_50 - 1) < 1e-15


@pytest.mark.parametrize("t", sorted(ORBITS))
def test_orbits(t):
    x = mp.mpf(t)
    for expected in ORBITS[t]:
        assert abs(x / expected - 1) < 1e-15
        x = mp.expm1(x)


def _potential(k, n):
    z = k
    for _ in range(n):
        z = mp.exp(z) + k
    for _ in range(n):
        z = mp.log1p(z)
    return z


@pytest.mark.parametrize("t", sorted(KAPPA_ZEROS))
def test_kappa_zeros(t):
    k = mp.findroot(lambda k: _potential(k, 3) - t, mp.mpf(KAPPA_ZEROS[t]))
    assert abs(k - KAPPA_ZEROS[t]) < 1e-15


def test_t_star():
    assert abs(_potential(mp.mpf(0), 4) - T_STAR) < 1e-15
