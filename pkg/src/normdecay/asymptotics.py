"""Windowed exponent estimators and resolvent-growth bounds.

Limits such as ``liminf_{eps -> 0} ln mu(B(w, eps)) / ln eps`` cannot be
computed; the estimators here report the minimum and maximum of a
finite-window statistic and record the window they used.

By default the statistic is an anchored chord: the log-log slope between the
coarsest grid point and the current one. It has the same liminf and limsup
as the plain ratio ``ln m / ln eps`` but drops the constant offset
``ln m(1) / ln eps``, which decays only logarithmically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWindow, OutOfRange, SpectrumOnAxis
from .measure import OrbitSeries, SpectralMeasure, ball_mass
from .models import model_hash, resolvent_norm, semigroup_opnorm_log
from .optimize import geometric_grid, golden_section

DEFAULT_C = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class ExponentEstimate:
    lower: float
    upper: float
    scale_window: tuple[float, float]
    samples: int
    values: tuple[float, ...] = field(default=(), repr=False)
    anchored: bool = True
    tail: float = 1.0


def _tail(values: list[float], tail: float) -> list[float]:
    if not 0 < tail <= 1:
        raise ValueError("tail must lie in (0, 1]")
    k = max(1, math.ceil(tail * len(values)))
    return values[-k:]


def scaling_exponents(
    mu: SpectralMeasure,
    w: float,
    eps_min: float,
    eps_max: float,
    *,
    anchored: bool = True,
    tail: float = 1.0,
) -> ExponentEstimate:
    """Lower and upper pointwise scaling exponents of ``mu`` at ``w``.

    Scales run ``eps_max, eps_max/2, ...`` down to ``eps_min``. Both exponents
    are infinite when the smallest ball in the window carries no mass.
    ``tail < 1`` restricts the min/max to that fraction of the smallest scales.
    """
    if not 0 < eps_min < eps_max:
        raise DegenerateWindow("need 0 < eps_min < eps_max")
    eps = eps_max * 0.5 ** np.arange(0, 1 + math.floor(math.log2(eps_max / eps_min) + 1e-9))
    if eps.size < 8:
        raise DegenerateWindow(f"only {eps.size} grid scales in [{eps_min!r}, {eps_max!r}]; need 8")
    masses = [ball_mass(mu, w, float(e)) for e in eps]
    window = (float(eps[-1]), float(eps[0]))
    if masses[-1] == 0:
        return ExponentEstimate(math.inf, math.inf, window, eps.size, (), anchored, tail)
    if anchored:
        lm0, le0 = math.log(masses[0]), math.log(eps[0])
        q = [(math.log(m) - lm0) / (math.log(e) - le0) for m, e in zip(masses[1:], eps[1:])]
    else:
        q = [math.log(m) / math.log(e) for m, e in zip(masses, eps) if e < 1]
    if not q:
        raise DegenerateWindow("no usable scales below 1")
    vals = _tail(q, tail)
    return ExponentEstimate(min(vals), max(vals), window, eps.size, tuple(q), anchored, tail)


def decay_exponents(series: OrbitSeries, *, anchored: bool = True, tail: float = 1.0) -> ExponentEstimate:
    """Lower and upper decay exponents of ``||e^{tN}x||^2`` from an orbit series.

    ``lower`` tracks ``-limsup ln||.||^2 / ln t`` and ``upper`` tracks
    ``-liminf ln||.||^2 / ln t``.
    """
    t = np.asarray(series.t, dtype=float)
    ln2 = np.asarray(series.log_norm2, dtype=float)
    if t.size < 8:
        raise DegenerateWindow(f"{t.size} samples; need at least 8")
    if not (t[0] > 0 and np.all(np.diff(t) > 0)):
        raise DegenerateWindow("times must be positive and increasing")
    if t[-1] / t[0] < 1e6 * (1 - 1e-12):
        raise DegenerateWindow("series must span at least six decades")
    if anchored:
        p = [-(l - ln2[0]) / (math.log(tt) - math.log(t[0])) for tt, l in zip(t[1:], ln2[1:])]
    else:
        p = [-l / math.log(tt) for tt, l in zip(t, ln2) if tt > 1]
    vals = _tail([float(x) for x in p], tail)
    return ExponentEstimate(min(vals), max(vals), (float(t[0]), float(t[-1])), int(t.size), tuple(p), anchored, tail)


# ----------------------------------------------------------- resolvent side

def _s_lattice(y_max: float) -> np.ndarray:
    """Fixed sample positions ``±2^{j/2}`` (plus 0) used for every profile."""
    if y_max <= 0:
        return np.array([0.0])
    jmax = math.floor(2 * math.log2(y_max)) if y_max >= 2.0 ** -20 else -41
    pos = 2.0 ** (np.arange(-40, jmax + 1) / 2.0)
    pos = pos[pos < y_max]
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass(frozen=True)
class ResolventProfile:
    """Running maximum ``M(y)`` of the resolvent norm on ``[-iy, iy]``.

    Beyond the last grid point ``M`` is taken as constant when
    ``constant_tail`` is set, otherwise lookups there raise OutOfRange.
    """

    y: tuple[float, ...]
    M: tuple[float, ...]
    M_log: tuple[float, ...]
    samples: tuple[tuple[float, float], ...] = field(repr=False, default=())
    constant_tail: bool = False
    model_id: str = ""


def _m_log_value(M: float, y: float) -> float:
    return M * (math.log1p(M) + math.log1p(y))


def resolvent_profile(model, y_max: float, *, ys=(), ratio: float = 2.0, constant_tail: bool = False) -> ResolventProfile:
    """Tabulate ``M`` and ``M_log`` on ``0``, a geometric grid up to ``y_max`` and ``ys``.

    The resolvent norm is sampled at a fixed lattice of ``s`` values plus the
    grid endpoints ``±y``; interior local maxima of the sampled norm are
    refined by golden-section search.
    """
    if not (y_max > 0 and math.isfinite(y_max)):
        raise ValueError("y_max must be finite and > 0")
    grid = [0.0]
    if y_max > 2.0 ** -10:
        grid += list(geometric_grid(2.0 ** -10, y_max, ratio))
    grid += [float(y) for y in ys if 0 < y <= y_max] + [y_max]
    grid = sorted(set(grid))
    s_vals = set(_s_lattice(y_max).tolist())
    for y in grid:
        s_vals.update((y, -y))
    s_sorted = sorted(s_vals)
    norms = [resolvent_norm(model, s) for s in s_sorted]
    if any(math.isinf(n) for n in norms):
        bad = s_sorted[[math.isinf(n) for n in norms].index(True)]
        raise SpectrumOnAxis(f"resolvent norm is infinite at s = {bad!r}")
    samples = list(zip(s_sorted, norms))
    for i in range(1, len(s_sorted) - 1):
        if norms[i] > norms[i - 1] and norms[i] >= norms[i + 1]:
            s_star, n_star = golden_section(lambda s: resolvent_norm(model, s), s_sorted[i - 1], s_sorted[i + 1],
                                            maximize=True)
            if math.isinf(n_star):
                raise SpectrumOnAxis(f"resolvent norm is infinite at s = {s_star!r}")
            samples.append((s_star, n_star))
    samples.sort()
    arr_s = np.array([s for s, _ in samples])
    arr_n = np.array([n for _, n in samples])
    M = []
    for y in grid:
        M.append(float(np.max(arr_n[np.abs(arr_s) <= y])))
    M = list(np.maximum.accumulate(M))
    M_log = [_m_log_value(m, y) for m, y in zip(M, grid)]
    return ResolventProfile(tuple(grid), tuple(float(m) for m in M), tuple(M_log), tuple(samples),
                            constant_tail, model_hash(model))


def resolvent_growth(model, y: float) -> float:
    """``M(y) = max_{|s| <= y} ||R(is, A)||``."""
    if not y >= 0:
        raise ValueError("y must be >= 0")
    if y == 0:
        n = resolvent_norm(model, 0.0)
        if math.isinf(n):
            raise SpectrumOnAxis("resolvent norm is infinite at s = 0")
        return n
    return resolvent_profile(model, y, ratio=4.0).M[-1]


def m_log(profile: ResolventProfile, y: float) -> float:
    """``M_log(y)``: linear interpolation in ``ln(1+y)`` between grid points."""
    ys, vals = profile.y, profile.M_log
    if y < 0 or y != y:
        raise OutOfRange("y must be >= 0")
    if y > ys[-1]:
        if not profile.constant_tail:
            raise OutOfRange(f"y = {y!r} beyond profile end {ys[-1]!r}")
        return _m_log_value(profile.M[-1], y)
    u = np.log1p(np.asarray(ys))
    return float(np.interp(math.log1p(y), u, vals))


def m_log_inv_log(profile: ResolventProfile, v: float) -> float:
    """``ln M_log^{-1}(v)``, usable when the inverse exceeds the double range."""
    ys, vals = profile.y, profile.M_log
    if not v >= vals[0]:
        raise OutOfRange(f"v = {v!r} below M_log(0) = {vals[0]!r}")
    if v > vals[-1]:
        if not profile.constant_tail:
            raise OutOfRange(f"v = {v!r} beyond profile maximum {vals[-1]!r}")
        M = profile.M[-1]
        u = v / M - math.log1p(M)
        return u + math.log(-math.expm1(-u))  # ln(e^u - 1)
    u = np.log1p(np.asarray(ys))
    j = int(np.searchsorted(vals, v, side="left"))
    if vals[j] == v:
        return math.log(ys[j]) if ys[j] > 0 else -math.inf
    lo, hi = float(u[j - 1]), float(u[j])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.interp(mid, u, vals) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    uu = 0.5 * (lo + hi)
    return math.log(math.expm1(uu)) if uu > 0 else -math.inf


def m_log_inv(profile: ResolventProfile, v: float) -> float:
    """``M_log^{-1}(v)`` by bisection on the interpolant."""
    ly = m_log_inv_log(profile, v)
    return math.exp(ly) if ly < 709.0 else math.inf


@dataclass
class CheckReport:
    name: str
    model_id: str
    verdict: str  # PASS | FAIL | SKIP
    details: dict


def bd_bound_check(model, t_grid, C_candidates=DEFAULT_C, *, y_cap: float = 1e300) -> CheckReport:
    """Compare ``ln ||T(t) A^{-1}||`` with ``-ln M_log^{-1}(t/C)`` on ``t_grid``.

    Reports the smallest candidate ``C`` for which the bound holds at every
    grid time. Raises SpectrumOnAxis when the model's spectrum meets the
    imaginary axis.
    """
    if math.isinf(resolvent_norm(model, 0.0)):
        raise SpectrumOnAxis("0 lies in the spectrum")
    ts = [float(t) for t in t_grid]
    prof = resolvent_profile(model, y_cap, constant_tail=True)
    lhs = [semigroup_opnorm_log(model, t, 1) for t in ts]
    per_c = []
    passing = None
    for C in C_candidates:
        rows, violation = [], None
        for t, left in zip(ts, lhs):
            try:
                right = -m_log_inv_log(prof, t / C)
            except OutOfRange:
                right = math.nan
            ok = right == right and left <= right
            rows.append({"t": t, "lhs": left, "rhs": right, "ok": ok})
            if not ok and violation is None:
                violation = t
        per_c.append({"C": float(C), "passed": violation is None, "first_violation": violation, "points": rows})
        if violation is None and passing is None:
            passing = float(C)
    return CheckReport(
        "bd-bound",
        model_hash(model),
        "PASS" if passing is not None else "FAIL",
        {"smallest_C": passing, "candidates": per_c, "profile_end": prof.y[-1]},
    )


def poly_scale_check(
    model,
    a: float,
    b: float = 0.0,
    *,
    s_range=(1e2, 1e6),
    t_range=(1e2, 1e6),
    points: int = 17,
    rel_tol: float = 0.05,
) -> CheckReport:
    """Fit log-log slopes of ``M(s)`` and of ``||T(t) A^{-1}||`` and compare with ``(a, -1/a)``.

    The logarithmic exponent ``b`` is only estimated, from the slope of the
    resolvent fit residuals against ``ln ln s``.
    """
    if not a > 0:
        raise ValueError("a must be > 0")
    s = np.geomspace(s_range[0], s_range[1], points)
    t = np.geomspace(t_range[0], t_range[1], points)
    prof = resolvent_profile(model, float(s[-1]), ys=tuple(float(x) for x in s))
    lookup = dict(zip(prof.y, prof.M))
    M = np.array([lookup[float(x)] for x in s])
    dec = np.array([semigroup_opnorm_log(model, float(x), 1) for x in t])
    slope_res, icpt = np.polyfit(np.log(s), np.log(M), 1)
    slope_dec = np.polyfit(np.log(t), dec, 1)[0]
    resid = np.log(M) - (slope_res * np.log(s) + icpt)
    b_slope = float(np.polyfit(np.log(np.log(s)), resid, 1)[0])
    dev_res = abs(slope_res - a) / a
    dev_dec = abs(slope_dec + 1.0 / a) * a
    ok = dev_res <= rel_tol and dev_dec <= rel_tol
    return CheckReport(
        "poly-scale",
        model_hash(model),
        "PASS" if ok else "FAIL",
        {
            "a": float(a),
            "b": float(b),
            "slope_resolvent": float(slope_res),
            "slope_decay": float(slope_dec),
            "deviation_resolvent": float(dev_res),
            "deviation_decay": float(dev_dec),
            "b_residual_slope": b_slope,
            "tolerance": rel_tol,
            "s_grid": [float(x) for x in s],
            "t_grid": [float(x) for x in t],
        },
    )


def growth_bound(samples) -> float:
    """Exponential growth bound estimated as the mean of ``ln||T(t)|| / t`` over the last quartile."""
    pts = [(float(t), float(v)) for t, v in samples]
    if len(pts) < 8:
        raise DegenerateWindow(f"{len(pts)} samples; need at least 8")
    ts = [t for t, _ in pts]
    if ts[0] <= 0 or any(b <= a for a, b in zip(ts, ts[1:])):
        raise DegenerateWindow("times must be positive and increasing")
    if ts[-1] / ts[0] < 100 * (1 - 1e-12):
        raise DegenerateWindow("samples must span at least two decades")
    k = max(1, math.ceil(len(pts) / 4))
    return math.fsum(v / t for t, v in pts[-k:]) / k
