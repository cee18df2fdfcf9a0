"""Special functions evaluated in the log domain.

Only what the orbit integrals need: log-sum-exp, the incomplete gamma
integral over an interval, and exponentially scaled modified Bessel
functions.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300


def log_sum_exp(values) -> float:
    """``ln(sum(exp(v)))`` with a compensated sum after shifting by the max."""
    vals = [float(v) for v in values]
    if not vals:
        return -math.inf
    m = max(vals)
    if m == -math.inf:
        return -math.inf
    if m == math.inf:
        return math.inf
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


def log_diff_exp(a: float, b: float) -> float:
    """``ln(exp(a) - exp(b))`` for ``a >= b``."""
    if b == -math.inf:
        return a
    if b >= a:
        return -math.inf
    return a + math.log1p(-math.exp(b - a))


# ---------------------------------------------------------- incomplete gamma

def _log_lower_series(g: float, x: float) -> float:
    # gamma(g, x) = e^-x x^g sum_n x^n / (g (g+1) ... (g+n))
    term = 1.0 / g
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (g + n)
        total += term
        if term < total * _EPS or n > 10_000:
            break
    return -x + g * math.log(x) + math.log(total)


def _log_upper_cf(g: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Gamma(g, x)
    b = x + 1.0 - g
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - g)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return -x + g * math.log(x) + math.log(h)


def log_lower_gamma(g: float, x: float) -> float:
    """``ln ∫_0^x e^{-u} u^{g-1} du``."""
    if x <= 0:
        return -math.inf
    if x == math.inf:
        return math.lgamma(g)
    if x < g + 1.0:
        return _log_lower_series(g, x)
    return log_diff_exp(math.lgamma(g), _log_upper_cf(g, x))


def log_upper_gamma(g: float, x: float) -> float:
    """``ln ∫_x^∞ e^{-u} u^{g-1} du``."""
    if x == math.inf:
        return -math.inf
    if x <= 0:
        return math.lgamma(g)
    if x < g + 1.0:
        return log_diff_exp(math.lgamma(g), _log_lower_series(g, x))
    return _log_upper_cf(g, x)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def log_gamma_interval(g: float, x0: float, x1: float) -> float:
    """``ln ∫_{x0}^{x1} e^{-u} u^{g-1} du`` for ``0 <= x0 <= x1 <= inf``.

    Differences of complete pieces are used unless the interval is short
    relative to its position, where they would cancel. There a 24-point
    Gauss-Legendre rule is applied directly to the smooth integrand.
    """
    if not x1 > x0:
        return -math.inf
    if x0 <= 0:
        return log_lower_gamma(g, x1)
    if x1 == math.inf:
        return log_upper_gamma(g, x0)
    width = x1 - x0
    if width <= min(1.0, 0.25 * x0):
        half = 0.5 * width
        u = x0 + half * (_GL_X + 1.0)
        logs = -(u - x0) + (g - 1.0) * np.log(u) + np.log(_GL_W * half)
        return -x0 + log_sum_exp(logs)
    if x0 >= g + 1.0:
        return log_diff_exp(log_upper_gamma(g, x0), log_upper_gamma(g, x1))
    return log_diff_exp(log_lower_gamma(g, x1), log_lower_gamma(g, x0))


# ------------------------------------------------------------------- Bessel

def log_i0e(x: float) -> float:
    """``ln(e^{-x} I_0(x))`` for ``x >= 0`` without forming ``I_0(x)``.

    Power series up to x = 20, the large-argument asymptotic series beyond.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    if x <= 20.0:
        q = 0.25 * x * x
        term = 1.0
        parts = [1.0]
        total = 1.0
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            parts.append(term)
            total += term
            if term <= 1e-18 * total:
                break
        return math.log(math.fsum(parts)) - x
    inv8x = 1.0 / (8.0 * x)
    term = 1.0
    parts = [1.0]
    k = 0
    while True:
        k += 1
        ratio = (2 * k - 1) ** 2 * inv8x / k
        if ratio >= 1.0:
            break
        term *= ratio
        parts.append(term)
        if term < 1e-18:
            break
    return math.log(math.fsum(parts)) - 0.5 * math.log(2.0 * math.pi * x)


def i0e(x: float) -> float:
    return math.exp(log_i0e(x))


@lru_cache(maxsize=64)
def _scaled_orders_cached(x: float, nmax: int) -> tuple[float, ...]:
    if x == 0:
        return (1.0,) + (0.0,) * nmax
    if x < 1.0:
        # the recurrence multiplies by 2n/x and overflows for tiny x; the series is quick here
        q = 0.25 * x * x
        out = []
        for n in range(nmax + 1):
            term = math.exp(n * (math.log(x) - math.log(2.0)) - math.lgamma(n + 1) - x) if n else math.exp(-x)
            total, k = term, 0
            while term > 1e-17 * total:
                k += 1
                term *= q / (k * (k + n))
                total += term
            out.append(total)
        return tuple(out)
    start = max(nmax, int(x)) + 30 + int(12.0 * math.sqrt(max(x, 1.0)))
    b = [0.0] * (start + 2)
    b[start] = 1.0
    for n in range(start, 0, -1):
        b[n - 1] = b[n + 1] + (2.0 * n / x) * b[n]
        if b[n - 1] > 1e250:
            for j in range(n - 1, start + 1):
                b[j] *= 1e-250
    # e^{-x}(I_0 + 2 sum_{n>=1} I_n) = 1 fixes the normalisation
    norm = math.fsum([b[0]] + [2.0 * v for v in b[1:]])
    return tuple(v / norm for v in b[: nmax + 1])


def scaled_bessel_orders(x: float, nmax: int) -> np.ndarray:
    """Array of ``e^{-x} I_n(x)`` for ``n = 0..nmax`` by Miller's backward recurrence."""
    if x < 0 or nmax < 0:
        raise ValueError("x and nmax must be nonnegative")
    return np.array(_scaled_orders_cached(float(x), int(nmax)))
