"""Normal-generator models: multiplication operators and the discrete Laplacian.

A multiplication model is given by two real curves on a parameter interval.
The generator has spectrum points ``-r(y) - i v(y)``, so ``r >= 0`` makes the
semigroup contractive and ``|phi(y)| = hypot(r(y), v(y))`` is the modulus of
the spectral point.

Extrema over the parameter are located on a fixed bracketing grid (geometric
clusters toward finite endpoints, geometric growth up to 1e300 on unbounded
domains) and then polished by golden-section search. Unbounded domains also
contribute the IEEE value of the curves at ``y = inf`` as the limit point.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConfigError,
    DomainError,
    ExprSyntaxError,
    InvalidModel,
    NotMonotone,
    OptimizationFailure,
)
from .expr import Expr, compile_scalar, evaluate, parse, to_text
from .measure import ExprSegment, SpectralMeasure, squared
from .optimize import bracket_grid, golden_section
from .special import log_i0e, scaled_bessel_orders


def _safe(f):
    def g(y: float) -> float:
        try:
            return f(y)
        except (DomainError, ValueError, ZeroDivisionError, OverflowError):
            return math.nan

    return g


@dataclass(frozen=True)
class MultiplicationModel:
    r: Expr
    v: Expr
    domain: tuple[float, float]

    def __post_init__(self):
        lo, hi = (float(x) for x in self.domain)
        if not math.isfinite(lo):
            raise InvalidModel("domain start must be finite", field="domain")
        if not hi > lo:
            raise InvalidModel("domain must satisfy y0 < y1", field="domain")
        object.__setattr__(self, "domain", (lo, hi))
        inner = self._grid[(self._grid > lo) & (self._grid < hi)]
        for name in ("r", "v"):
            vals = evaluate(getattr(self, name), inner, strict=False)
            if np.any(np.isnan(vals)):
                y = inner[int(np.argmax(np.isnan(vals)))]
                raise InvalidModel(f"{name}(y) undefined at interior point y = {y!r}", field=name)
        r_in = evaluate(self.r, inner, strict=False)
        if np.any(r_in < 0):
            y = inner[int(np.argmax(r_in < 0))]
            raise InvalidModel(f"r(y) must be >= 0, got {float(r_in[r_in < 0][0])!r} at y = {y!r}", field="r")

    @classmethod
    def from_text(cls, r: str, v: str, domain) -> "MultiplicationModel":
        return cls(parse(r), parse(v), tuple(float(x) for x in domain))

    # sampled curves ---------------------------------------------------------
    @cached_property
    def _grid(self) -> np.ndarray:
        lo, hi = (float(x) for x in self.domain)
        g = bracket_grid(lo, hi, ratio=1.25)
        if math.isinf(hi):
            g = np.append(g, math.inf)
        return g

    @cached_property
    def _curves(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g = self._grid
        r = evaluate(self.r, g, strict=False)
        v = evaluate(self.v, g, strict=False)
        ok = ~(np.isnan(r) | np.isnan(v))
        return g[ok], r[ok], v[ok]

    @cached_property
    def _scalar(self):
        return _safe(compile_scalar(self.r)), _safe(compile_scalar(self.v))

    def to_doc(self) -> dict:
        lo, hi = self.domain
        return {"kind": "mult", "r": to_text(self.r), "v": to_text(self.v),
                "domain": [lo, "inf" if math.isinf(hi) else hi]}

    def as_multiplication(self) -> "MultiplicationModel":
        return self


@dataclass(frozen=True)
class LaplacianModel:
    """Second-difference operator on the integer lattice, spectrum [-4, 0]."""

    def as_multiplication(self) -> MultiplicationModel:
        return _laplacian_curve()

    def to_doc(self) -> dict:
        return {"kind": "laplacian"}


_LAP: list[MultiplicationModel] = []


def _laplacian_curve() -> MultiplicationModel:
    if not _LAP:
        _LAP.append(MultiplicationModel(parse("-y"), parse("0"), (-4.0, 0.0)))
    return _LAP[0]


OperatorModel = MultiplicationModel | LaplacianModel


def model_hash(model) -> str:
    text = json.dumps(model.to_doc(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ----------------------------------------------------------------- extrema

def _local_extrema(vals: np.ndarray, count: int, maximize: bool) -> list[int]:
    """Indices of the best ``count`` grid points that are local extrema."""
    x = -vals if maximize else vals
    x = np.where(np.isnan(x), np.inf, x)
    n = x.size
    left = np.concatenate([[np.inf], x[:-1]])
    right = np.concatenate([x[1:], [np.inf]])
    idx = np.nonzero((x <= left) & (x <= right) & np.isfinite(x))[0]
    if idx.size == 0:
        idx = np.array([int(np.argmin(x))]) if n and np.isfinite(x).any() else idx
    order = idx[np.argsort(x[idx], kind="stable")]
    return [int(i) for i in order[:count]]


def _polish(f, grid: np.ndarray, i: int, maximize: bool) -> tuple[float, float]:
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    if math.isinf(b):
        b = grid[i] if math.isfinite(grid[i]) else a
    if not a < b:
        x = float(grid[i])
        return x, f(x)
    return golden_section(f, float(a), float(b), maximize=maximize)


def spectral_distance(model, s: float) -> float:
    """``inf_y |r(y) + i (s + v(y))|``, the distance from ``i s`` to the spectrum."""
    m = model.as_multiplication()
    g, r, v = m._curves
    if g.size == 0:
        raise OptimizationFailure("curves undefined on the whole domain", m.domain)
    with np.errstate(all="ignore"):
        d = np.hypot(r, s + v)
    best = float(np.nanmin(d))
    if best == 0:
        return 0.0
    rf, vf = m._scalar

    def dist(y: float) -> float:
        return math.hypot(rf(y), s + vf(y))

    for i in _local_extrema(d, 2, maximize=False):
        _, val = _polish(dist, g, i, maximize=False)
        best = min(best, val)
    # the sharpest minima sit where the curve crosses the level -s
    h = s + v
    sign = np.sign(h)
    cross = np.nonzero((sign[:-1] * sign[1:] < 0) & np.isfinite(h[:-1]) & np.isfinite(h[1:]))[0]
    if cross.size:
        near = cross[np.argsort(np.minimum(d[cross], d[cross + 1]), kind="stable")][:2]
        for j in near:
            a, b = float(g[j]), float(g[j + 1])
            try:
                root = brentq(lambda y: s + vf(y), a, b, xtol=1e-300, rtol=8.9e-16, maxiter=400)
            except (ValueError, RuntimeError):
                continue
            for y in (root, math.nextafter(root, -math.inf), math.nextafter(root, math.inf)):
                if a <= y <= b:
                    val = dist(y)
                    if val == val:
                        best = min(best, val)
    return best


def resolvent_norm(model, s: float) -> float:
    """``1 / dist(i s, spectrum)``; ``math.inf`` when ``i s`` lies on the spectrum."""
    d = spectral_distance(model, float(s))
    return math.inf if d == 0 else 1.0 / d


def semigroup_opnorm_log(model, t: float, k: int = 0) -> float:
    """``ln sup_y e^{-t r(y)} / |phi(y)|^k``, the log of ``||T(t) A^{-k}||``."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError("t must be finite and >= 0")
    if int(k) != k or k < 0:
        raise ValueError("k must be an integer >= 0")
    if t == 0 and k == 0:
        return 0.0
    m = model.as_multiplication()
    g, r, v = m._curves
    if k >= 1 and spectral_distance(m, 0.0) == 0:
        raise InvalidModel("|phi| vanishes on the domain, so A has no bounded inverse", field="r")
    with np.errstate(all="ignore"):
        obj = -t * r - k * np.log(np.hypot(r, v))
    obj = np.where(np.isnan(obj), -np.inf, obj)
    # at y = inf both terms can be infinite; treat -inf + inf as undefined
    if not np.isfinite(obj).any() and not (obj == np.inf).any():
        raise OptimizationFailure("objective undefined throughout the domain", m.domain)
    best = float(np.max(obj))
    rf, vf = m._scalar

    def f(y: float) -> float:
        rv = rf(y)
        return -t * rv - k * math.log(math.hypot(rv, vf(y)))

    for i in _local_extrema(obj, 2, maximize=True):
        _, val = _polish(_safe(f), g, i, maximize=True)
        if val == val:
            best = max(best, val)
    return best


def model_gap(model) -> float:
    """``inf_y r(y)``: the distance from 0 to the spectrum of the real part."""
    m = model.as_multiplication()
    g, r, _ = m._curves
    best = float(np.min(r))
    rf, _ = m._scalar
    for i in _local_extrema(r, 2, maximize=False):
        _, val = _polish(rf, g, i, maximize=False)
        if val == val:
            best = min(best, val)
    return max(best, 0.0) + 0.0  # never -0.0


def state_measure(model, weight: Expr, support) -> SpectralMeasure:
    """Spectral measure of the state ``weight`` restricted to ``support``.

    It is the pushforward of ``weight(y)^2 dy`` under ``y -> -r(y)``; ``r``
    must be strictly monotone on ``support``.
    """
    m = model.as_multiplication()
    p0, p1 = (float(x) for x in support)
    lo, hi = m.domain
    if not (lo <= p0 < p1 <= hi and math.isfinite(p1)):
        raise InvalidModel(f"support [{p0!r}, {p1!r}] must be a finite subinterval of the domain", field="support")
    ps = np.linspace(p0, p1, 257)
    rs = evaluate(m.r, ps, strict=False)
    ok = ~np.isnan(rs)
    diffs = np.diff(rs[ok])
    if (diffs > 0).any() and (diffs < 0).any():
        raise NotMonotone("r changes direction on the support; split it into monotone pieces")
    if not (diffs != 0).any():
        raise NotMonotone("r is constant on the support")
    return SpectralMeasure(segments=(ExprSegment(squared(weight), None, 1.0, m.r, (p0, p1)),))


# ---------------------------------------------------------------- Laplacian

def laplacian_log_norm2(t: float) -> float:
    """``ln ||e^{t Δ} δ_0||^2 = ln(e^{-4t} I_0(4t))``."""
    if not t >= 0:
        raise ValueError("t must be >= 0")
    return log_i0e(4.0 * t)


@dataclass(frozen=True)
class FiniteVector:
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        idx = [int(i) for i, _ in self.entries]
        if len(set(idx)) != len(idx):
            raise ValueError("FiniteVector indices must be distinct")
        object.__setattr__(self, "entries", tuple((int(i), float(x)) for i, x in self.entries))

    @classmethod
    def delta(cls, n: int = 0) -> "FiniteVector":
        return cls(((n, 1.0),))


def laplacian_orbit(x: FiniteVector, t: float, n: int) -> float:
    """Coordinate ``n`` of ``e^{tΔ} x`` via the kernel ``e^{-2t} I_{n-m}(2t)``."""
    if not t >= 0:
        raise ValueError("t must be >= 0")
    if not x.entries:
        return 0.0
    nmax = max(abs(n - m) for m, _ in x.entries)
    ker = scaled_bessel_orders(2.0 * t, nmax)
    return math.fsum(ker[abs(n - m)] * val for m, val in x.entries)


# ------------------------------------------------------------ configuration

def _model_expr(doc: dict, key: str) -> Expr:
    text = doc.get(key)
    if not isinstance(text, str):
        raise ConfigError(f"{key}: expected an expression string", field=key)
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        raise ConfigError(f"{key}: {exc}", field=key, offset=exc.offset) from None


def _bound(x, where: str) -> float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number or \"inf\", got {x!r}", field=where)
    return float(x)


def model_from_doc(doc) -> MultiplicationModel | LaplacianModel:
    if not isinstance(doc, dict):
        raise ConfigError("model document must be an object")
    kind = doc.get("kind")
    if kind == "laplacian":
        return LaplacianModel()
    if kind != "mult":
        raise ConfigError(f"kind: expected \"mult\" or \"laplacian\", got {kind!r}", field="kind")
    r, v = _model_expr(doc, "r"), _model_expr(doc, "v")
    dom = doc.get("domain")
    if not (isinstance(dom, list) and len(dom) == 2):
        raise ConfigError("domain: expected [y0, y1]", field="domain")
    domain = (_bound(dom[0], "domain[0]"), _bound(dom[1], "domain[1]"))
    try:
        return MultiplicationModel(r, v, domain)
    except InvalidModel as exc:
        raise ConfigError(str(exc), field=exc.field) from None
