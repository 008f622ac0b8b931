import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_lateral.special_functions import UNDERFLOW_THRESHOLD, bessel_k

mpmath.mp.dps = 40


def reference(order, u):
    return float(mpmath.besselk(order, u))


@pytest.mark.parametrize("order", [0, 1, 2, 3])
@pytest.mark.parametrize("u", [1e-6, 1e-3, 0.1, 1.0, 2.5, 10.0, 50.0, 300.0, 699.0])
def test_matches_high_precision(order, u):
    assert bessel_k(order, u) == pytest.approx(reference(order, u), rel=1e-12)


def test_known_values():
    assert bessel_k(2, 1.0) == pytest.approx(1.6248388986351774, rel=1e-13)
    assert bessel_k(3, 1.0) == pytest.approx(7.1012628247379448, rel=1e-13)


@given(st.floats(0.01, 100.0))
def test_recurrence(u):
    for n in (1, 2):
        lhs = bessel_k(n + 1, u)
        res = lhs - bessel_k(n - 1, u) - (2 * n / u) * bessel_k(n, u)
        assert abs(res) / lhs <= 1e-11


def test_positive_and_decreasing():
    u = np.logspace(-4, 2.7, 400)
    for n in range(4):
        k = bessel_k(n, u)
        assert np.all(k > 0)
        assert np.all(np.diff(k) < 0)


def test_large_argument_asymptote():
    u = 50.0
    for n in range(4):
        scaled = bessel_k(n, u) * math.sqrt(2 * u / math.pi) * math.exp(u)
        # the first correction is (4 n^2 - 1) / (8 u): under 1% only for n <= 1 at u = 50
        if n <= 1:
            assert scaled == pytest.approx(1, abs=0.01)
        mu = 4 * n * n
        series = 1 + (mu - 1) / (8 * u) + (mu - 1) * (mu - 9) / (2 * (8 * u) ** 2)
        assert scaled == pytest.approx(series, rel=1e-4)
        assert bessel_k(n, 600.0) * math.sqrt(1200 / math.pi) * math.exp(600) == pytest.approx(1, abs=0.01)


def test_underflow_flag():
    val, flag = bessel_k(2, UNDERFLOW_THRESHOLD + 1, full_output=True)
    assert val == 0.0 and flag
    val, flag = bessel_k(2, 1.0, full_output=True)
    assert val > 0 and not flag
    vals, flags = bessel_k(3, np.array([1.0, 800.0]), full_output=True)
    assert flags.tolist() == [False, True] and vals[1] == 0


@pytest.mark.parametrize("u", [0.0, -1.0, float("nan")])
def test_domain_error(u):
    with pytest.raises(ValueError):
        bessel_k(1, u)


@pytest.mark.parametrize("order", [-1, 4, 1.5])
def test_unsupported_order(order):
    with pytest.raises(ValueError):
        bessel_k(order, 1.0)
