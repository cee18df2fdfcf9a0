import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normdecay.special import (
    i0e,
    log_diff_exp,
    log_gamma_interval,
    log_i0e,
    log_lower_gamma,
    log_sum_exp,
    log_upper_gamma,
    scaled_bessel_orders,
)

mp.mp.dps = 30


def test_log_sum_exp_basic():
    assert log_sum_exp([]) == -math.inf
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2), rel=1e-15)
    assert log_sum_exp([-1e4, 0.0]) == 0.0


def test_log_diff_exp():
    assert log_diff_exp(0.0, -math.inf) == 0.0
    assert log_diff_exp(0.0, 0.0) == -math.inf
    assert log_diff_exp(math.log(3), math.log(2)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("g", [0.05, 0.5, 1.0, 2.5, 7.0, 40.0])
@pytest.mark.parametrize("x", [1e-8, 0.3, 1.0, 5.0, 60.0, 700.0])
def test_incomplete_gamma_against_mpmath(g, x):
    lo = float(mp.log(mp.gammainc(g, 0, x)))
    hi = float(mp.log(mp.gammainc(g, x, mp.inf)))
    assert log_lower_gamma(g, x) == pytest.approx(lo, rel=1e-13, abs=1e-13)
    assert log_upper_gamma(g, x) == pytest.approx(hi, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("g, a, b", [(0.5, 1e-3, 2e-3), (3.0, 10.0, 10.5), (1.0, 0.0, 1e-12), (0.25, 100.0, 400.0),
                                     (2.0, 1e5, 1e5 + 1)])
def test_gamma_interval_against_mpmath(g, a, b):
    ref = float(mp.log(mp.gammainc(g, a, b)))
    assert log_gamma_interval(g, a, b) == pytest.approx(ref, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 1e-10, 0.5, 3.0, 19.9, 20.1, 40.0, 250.0, 1e4, 1e8, 1e15])
def test_log_i0e_against_mpmath(x):
    ref = float(mp.log(mp.besseli(0, x)) - x)
    assert log_i0e(x) == pytest.approx(ref, rel=1e-14, abs=1e-15)
    assert i0e(x) == pytest.approx(math.exp(ref), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, 0.2, 2.0, 35.0, 400.0])
def test_scaled_orders_against_mpmath(x):
    ker = scaled_bessel_orders(x, 30)
    for n in (0, 1, 5, 30):
        ref = float(mp.besseli(n, x) * mp.exp(-x))
        assert ker[n] == pytest.approx(ref, rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.0, max_value=2000.0))
def test_scaled_orders_normalization(x):
    ker = scaled_bessel_orders(x, 5)
    full = scaled_bessel_orders(x, int(x + 60 + 15 * math.sqrt(x)))
    assert math.fsum([full[0]] + [2 * v for v in full[1:]]) == pytest.approx(1.0, rel=1e-13)
    assert np.all(np.diff(ker) <= 0)
