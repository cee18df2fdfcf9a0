"""One-dimensional search helpers: golden-section refinement and bracketing grids."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import OptimizationFailure

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


def golden_section(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    maximize: bool = False,
    rtol: float = 1e-10,
    maxiter: int = 3000,
) -> tuple[float, float]:
    """Locate an extremum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point probed, endpoints included.
    The loop stops once the bracket is narrower than ``rtol`` times the
    magnitude of its midpoint (or of the initial width when the bracket
    sits on zero), or when floating point can no longer split it.
    NaN values count as the worst possible objective.
    """
    if not a <= b:
        raise ValueError("need a <= b")
    sign = -1.0 if maximize else 1.0

    def g(x: float) -> float:
        v = f(x)
        return math.inf if v != v else sign * v

    floor = (b - a) * 1e-6
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    probes = [(g(a), a), (g(b), b), (gc, c), (gd, d)]
    for _ in range(maxiter):
        if b - a <= rtol * max(abs(0.5 * (a + b)), floor) or not (a < c < d < b):
            break
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
            probes.append((gc, c))
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
            probes.append((gd, d))
    else:
        raise OptimizationFailure("golden-section search did not converge", (a, b))
    best, x = min(probes, key=lambda p: (p[0], p[1]))
    if best == math.inf:
        raise OptimizationFailure("objective undefined throughout the bracket", (a, b))
    return x, sign * best


def bracket_grid(lo: float, hi: float, ratio: float = 1.25, tiny: float = 1e-16, cap: float = 1e300) -> np.ndarray:
    """Sample points for locating extrema of a function on ``[lo, hi]``.

    Points cluster geometrically (by ``ratio``) toward each finite endpoint and,
    for ``hi = inf``, grow geometrically up to ``cap``. A coarse uniform layer
    covers the middle of finite intervals.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    steps = []
    if math.isinf(hi):
        base = max(1.0, abs(lo))
        k = math.ceil(math.log(cap / base) / math.log(ratio))
        j0 = math.floor(math.log(tiny) / math.log(ratio))
        offs = base * ratio ** np.arange(j0, k + 1, dtype=float)
        pts = lo + offs
        pts = pts[np.isfinite(pts) & (pts <= cap)]
        steps.extend([np.array([lo]), pts])
    else:
        width = hi - lo
        n = math.ceil(math.log(tiny) / math.log(1.0 / ratio))
        offs = width * ratio ** (-np.arange(1, n + 1, dtype=float))
        steps.extend([lo + offs, hi - offs, np.linspace(lo, hi, 257)])
    out = np.unique(np.concatenate(steps))
    return out[(out >= lo) & (out <= hi)]


def geometric_grid(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """``lo, lo*ratio, lo*ratio^2, ...`` up to ``hi`` (inclusive up to rounding)."""
    if not (lo > 0 and hi >= lo and ratio > 1):
        raise ValueError("need 0 < lo <= hi and ratio > 1")
    n = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9))
    return lo * ratio ** np.arange(n + 1, dtype=float)
