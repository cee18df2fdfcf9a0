"""Finite positive measures on (-inf, 0] and their orbit-norm integrals.

A :class:`SpectralMeasure` is a finite list of atoms plus density segments.
For a normal generator with real part ``N_R`` and state ``x`` with spectral
measure ``mu``, the squared orbit norm is

    ||e^{tN} x||^2 = ∫ e^{2ty} dmu(y),

and :func:`orbit_log_norm2` returns its natural logarithm. All values stay in
the log domain so that norms far below the smallest double remain finite.

Ball conventions: :func:`ball_mass` uses the open interval
``(w - r, w + r)``, :func:`left_mass` the closed interval ``[-eps, 0]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ExprSyntaxError, InvalidMeasure, MeasureEmpty
from .expr import Expr, Mul, evaluate, parse, to_text
from .optimize import geometric_grid
from .quadrature import geometric_breaks, log_integrate
from .special import log_gamma_interval, log_sum_exp

_EDGE_DEPTH = 48  # geometric refinement toward possibly singular endpoints


def _check_support(a: float, b: float, where: str) -> tuple[float, float]:
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidMeasure(f"{where}: support must be finite, got [{a!r}, {b!r}]")
    if not a < b:
        raise InvalidMeasure(f"{where}: support needs a < b, got [{a!r}, {b!r}]")
    if b > 0:
        raise InvalidMeasure(f"{where}: support must lie in (-inf, 0], got b = {b!r}")
    return a + 0.0, b + 0.0


def _concentration_depth(width: float, t: float) -> int:
    # enough halvings to resolve the e^{2ty} boundary layer of width ~1/(2t)
    return max(8, min(1100, math.ceil(math.log2(width * (2.0 * t) + 1.0)) + 12))


@dataclass(frozen=True)
class Atom:
    y: float
    w: float


@dataclass(frozen=True)
class PowerSegment:
    """Density ``C |y|^(gamma-1)`` on ``[a, b]`` carrying total ``mass``.

    With ``b = 0`` the mass of ``[-eps, 0]`` is ``mass * (eps/|a|)^gamma``.
    """

    gamma: float
    mass: float
    support: tuple[float, float]
    kind = "power"

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidMeasure(f"power segment: gamma must be > 0, got {self.gamma!r}")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise InvalidMeasure(f"power segment: mass must be > 0, got {self.mass!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "support", _check_support(*self.support, "power segment"))

    @property
    def _norm(self) -> float:
        a, b = self.support
        return self.mass / (abs(a) ** self.gamma - abs(b) ** self.gamma)

    def mass_in(self, lo: float, hi: float) -> float:
        a, b = self.support
        u, v = max(lo, a), min(hi, b)
        if not u < v:
            return 0.0
        if (u, v) == (a, b):
            return self.mass
        return self._norm * (abs(u) ** self.gamma - abs(v) ** self.gamma)

    def log_laplace(self, t: float) -> float:
        if t == 0:
            return math.log(self.mass)
        a, b = self.support
        g = self.gamma
        # y = -u/(2t) turns the integral into an incomplete gamma integral
        return (
            math.log(self._norm * g)
            - g * math.log(2.0 * t)
            + log_gamma_interval(g, 2.0 * t * abs(b), 2.0 * t * abs(a))
        )

    def clip_below(self, c: float):
        a, b = self.support
        if b <= c:
            return self
        if c <= a:
            return None
        return PowerSegment(self.gamma, self.mass_in(a, c), (a, c))

    def scaled(self, f: float):
        return PowerSegment(self.gamma, self.mass * f, self.support)

    def to_doc(self) -> dict:
        return {"kind": "power", "gamma": self.gamma, "mass": self.mass, "support": list(self.support)}


@dataclass(frozen=True)
class ArcsineSegment:
    """Arcsine density ``scale / (pi sqrt(-y (y + 2h)))`` restricted to ``support ⊂ [-2h, 0]``.

    ``h = 2`` is the spectral measure of a lattice delta for the discrete Laplacian.
    """

    halfwidth: float = 2.0
    support: tuple[float, float] | None = None
    scale: float = 1.0
    kind = "arcsine"

    def __post_init__(self):
        h = float(self.halfwidth)
        object.__setattr__(self, "halfwidth", h)
        object.__setattr__(self, "scale", float(self.scale))
        if not (math.isfinite(h) and h > 0):
            raise InvalidMeasure(f"arcsine segment: halfwidth must be > 0, got {h!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidMeasure(f"arcsine segment: scale must be > 0, got {self.scale!r}")
        sup = (-2.0 * h, 0.0) if self.support is None else self.support
        a, b = _check_support(*sup, "arcsine segment")
        if a < -2.0 * h:
            raise InvalidMeasure(f"arcsine segment: support must lie in [{-2.0 * h!r}, 0]")
        object.__setattr__(self, "support", (a, b))

    def _theta(self, y: float) -> float:
        s = min(1.0, max(0.0, -y / (2.0 * self.halfwidth)))
        return 2.0 * math.asin(math.sqrt(s))

    @property
    def mass(self) -> float:
        a, b = self.support
        return self.scale * (self._theta(a) - self._theta(b)) / math.pi

    def mass_in(self, lo: float, hi: float) -> float:
        a, b = self.support
        u, v = max(lo, a), min(hi, b)
        if not u < v:
            return 0.0
        return self.scale * (self._theta(u) - self._theta(v)) / math.pi

    def log_laplace(self, t: float) -> float:
        if t == 0:
            return math.log(self.mass)
        a, b = self.support
        th0, th1 = self._theta(b), self._theta(a)
        c = 4.0 * t * self.halfwidth

        # y = -2h sin^2(theta/2) maps the density to d(theta)/pi
        def logf(th):
            return -c * np.sin(0.5 * th) ** 2

        depth = _concentration_depth(th1 - th0, t * self.halfwidth)
        breaks = geometric_breaks(th0, th1, "left", depth)
        return math.log(self.scale / math.pi) + log_integrate(logf, th0, th1, breaks=breaks)

    def clip_below(self, c: float):
        a, b = self.support
        if b <= c:
            return self
        if c <= a:
            return None
        return ArcsineSegment(self.halfwidth, (a, c), self.scale)

    def scaled(self, f: float):
        return ArcsineSegment(self.halfwidth, self.support, self.scale * f)

    def to_doc(self) -> dict:
        return {
            "kind": "arcsine",
            "halfwidth": self.halfwidth,
            "support": list(self.support),
            "scale": self.scale,
        }


@dataclass(frozen=True)
class ExprSegment:
    """Density given by an expression.

    Without ``map`` the density is ``scale * density(y)`` on ``support``.
    With ``map`` (a strictly monotone, nonnegative ``r``) the segment is the
    pushforward of ``scale * density(p) dp`` on ``param_support`` under
    ``p -> -r(p)``; ``support`` is then derived.
    """

    density: Expr
    support: tuple[float, float] | None = None
    scale: float = 1.0
    map: Expr | None = None
    param_support: tuple[float, float] | None = None
    kind = "expr"
    _mass: float = field(default=math.nan, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scale", float(self.scale))
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidMeasure(f"expr segment: scale must be > 0, got {self.scale!r}")
        if self.map is None:
            if self.support is None:
                raise InvalidMeasure("expr segment: support is required")
            object.__setattr__(self, "support", _check_support(*self.support, "expr segment"))
        else:
            if self.param_support is None:
                raise InvalidMeasure("expr segment: param_support is required with a map")
            p0, p1 = (float(v) for v in self.param_support)
            if not (math.isfinite(p0) and math.isfinite(p1) and p0 < p1):
                raise InvalidMeasure(f"expr segment: bad param_support [{p0!r}, {p1!r}]")
            object.__setattr__(self, "param_support", (p0, p1))
            try:
                r0, r1 = evaluate(self.map, p0), evaluate(self.map, p1)
            except DomainError as exc:
                raise InvalidMeasure(f"expr segment: map undefined at an endpoint ({exc})") from None
            lam = sorted((-r0, -r1))
            object.__setattr__(self, "support", _check_support(lam[0], lam[1], "expr segment"))
        self._validate_density()
        m = math.exp(self._log_integral(*self._param_bounds(), t=0.0))
        if not (math.isfinite(m) and m > 0):
            raise InvalidMeasure(f"expr segment: density must have finite positive mass, got {m!r}")
        object.__setattr__(self, "_mass", m)

    # parameter space helpers -------------------------------------------
    def _param_bounds(self) -> tuple[float, float]:
        return self.param_support if self.map is not None else self.support

    def _decreasing(self) -> bool:
        # True when the spectral position -r(p) decreases along p
        if self.map is None:
            return False
        p0, p1 = self.param_support
        return evaluate(self.map, p1) > evaluate(self.map, p0)

    def _spectral(self, p: np.ndarray) -> np.ndarray:
        if self.map is None:
            return p
        return -evaluate(self.map, p, strict=False)

    def _validate_density(self) -> None:
        p0, p1 = self._param_bounds()
        p = np.linspace(p0, p1, 515)[1:-1]
        vals = evaluate(self.density, p, strict=False)
        if np.any(np.isnan(vals)):
            i = int(np.argmax(np.isnan(vals)))
            raise InvalidMeasure(f"expr segment: density undefined at y = {p[i]!r}")
        if np.any(vals < 0):
            i = int(np.argmax(vals < 0))
            raise InvalidMeasure(f"expr segment: density negative at y = {p[i]!r}")

    def _log_integral(self, u: float, v: float, t: float) -> float:
        if not v > u:
            return -math.inf
        log_scale = math.log(self.scale)

        def logf(p):
            with np.errstate(all="ignore"):
                d = evaluate(self.density, p, strict=False)
                out = log_scale + np.log(d)
                if t:
                    out = out + 2.0 * t * self._spectral(p)
            return out

        breaks = geometric_breaks(u, v, "left", _EDGE_DEPTH) + geometric_breaks(u, v, "right", _EDGE_DEPTH)
        if t:
            a, b = self.support
            depth = _concentration_depth(b - a, t)
            breaks += geometric_breaks(u, v, "right" if not self._decreasing() else "left", depth)
        return log_integrate(logf, u, v, breaks=breaks)

    def _param_of(self, c: float) -> float:
        """Parameter whose spectral position equals ``c`` (``c`` inside support)."""
        if self.map is None:
            return c
        p0, p1 = self.param_support
        f = lambda p: -evaluate(self.map, p) - c  # noqa: E731
        return brentq(f, p0, p1, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def _param_interval(self, lo: float, hi: float):
        a, b = self.support
        u, v = max(lo, a), min(hi, b)
        if not u < v:
            return None
        if self.map is None:
            return (u, v)
        p0, p1 = self.param_support
        qa = p0 if self._decreasing() else p1  # parameter at spectral b
        qb = p1 if self._decreasing() else p0  # parameter at spectral a
        x_hi = qa if v == b else self._param_of(v)
        x_lo = qb if u == a else self._param_of(u)
        return (min(x_lo, x_hi), max(x_lo, x_hi))

    # segment interface ---------------------------------------------------
    @property
    def mass(self) -> float:
        return self._mass

    def mass_in(self, lo: float, hi: float) -> float:
        iv = self._param_interval(lo, hi)
        if iv is None:
            return 0.0
        if iv == self._param_bounds():
            return self._mass
        return math.exp(self._log_integral(iv[0], iv[1], 0.0))

    def log_laplace(self, t: float) -> float:
        if t == 0:
            return math.log(self._mass)
        return self._log_integral(*self._param_bounds(), t=t)

    def clip_below(self, c: float):
        a, b = self.support
        if b <= c:
            return self
        if c <= a:
            return None
        if self.map is None:
            return ExprSegment(self.density, (a, c), self.scale)
        pc = self._param_of(c)
        p0, p1 = self.param_support
        ps = (pc, p1) if self._decreasing() else (p0, pc)
        return ExprSegment(self.density, None, self.scale, self.map, ps)

    def scaled(self, f: float):
        return ExprSegment(self.density, self.support if self.map is None else None,
                           self.scale * f, self.map, self.param_support)

    def to_doc(self) -> dict:
        doc = {"kind": "expr", "density": to_text(self.density), "support": list(self.support),
               "scale": self.scale}
        if self.map is not None:
            doc["map"] = to_text(self.map)
            doc["param_support"] = list(self.param_support)
        return doc


Segment = Union[PowerSegment, ArcsineSegment, ExprSegment]


@dataclass(frozen=True)
class SpectralMeasure:
    """Atoms plus density segments on (-inf, 0]. Immutable.

    Atoms are kept sorted by position. A measure without atoms or segments is
    allowed (``is_zero``); its orbit norm is undefined.
    """

    atoms: tuple[Atom, ...] = ()
    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        atoms = []
        for i, at in enumerate(self.atoms):
            if not isinstance(at, Atom):
                at = Atom(*at)
            y, w = float(at.y), float(at.w)
            if not (math.isfinite(y) and y <= 0):
                raise InvalidMeasure(f"atoms[{i}]: position must be a finite value <= 0, got {y!r}")
            if not (math.isfinite(w) and w > 0):
                raise InvalidMeasure(f"atoms[{i}]: weight must be finite and > 0, got {w!r}")
            atoms.append(Atom(y + 0.0, w))
        atoms.sort(key=lambda a: a.y)
        for p, q in zip(atoms, atoms[1:]):
            if p.y == q.y:
                raise InvalidMeasure(f"atoms: duplicate position {p.y!r}")
        object.__setattr__(self, "atoms", tuple(atoms))
        for i, seg in enumerate(self.segments):
            if not isinstance(seg, (PowerSegment, ArcsineSegment, ExprSegment)):
                raise InvalidMeasure(f"segments[{i}]: unknown segment type {type(seg).__name__}")
        object.__setattr__(self, "segments", tuple(self.segments))

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls) -> "SpectralMeasure":
        return cls()

    @classmethod
    def dirac(cls, y: float = 0.0, w: float = 1.0) -> "SpectralMeasure":
        return cls(atoms=(Atom(y, w),))

    @classmethod
    def from_atoms(cls, pairs: Iterable[tuple[float, float]]) -> "SpectralMeasure":
        return cls(atoms=tuple(Atom(y, w) for y, w in pairs))

    @classmethod
    def power(cls, gamma: float, mass: float = 1.0, support=(-1.0, 0.0)) -> "SpectralMeasure":
        return cls(segments=(PowerSegment(gamma, mass, tuple(support)),))

    @classmethod
    def arcsine(cls, halfwidth: float = 2.0, scale: float = 1.0) -> "SpectralMeasure":
        return cls(segments=(ArcsineSegment(halfwidth, None, scale),))

    @classmethod
    def density(cls, text: str, support, scale: float = 1.0) -> "SpectralMeasure":
        return cls(segments=(ExprSegment(parse(text), tuple(support), scale),))

    # descriptors ------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.atoms and not self.segments

    @property
    def atom_at_zero(self) -> float:
        for at in self.atoms:
            if at.y == 0:
                return at.w
        return 0.0

    @property
    def gap(self) -> float:
        """Distance from 0 to the support (0 when mass accumulates at 0)."""
        tops = [at.y for at in self.atoms] + [seg.support[1] for seg in self.segments]
        return 0.0 - max(tops) if tops else math.inf


# --------------------------------------------------------------- operations

def total_mass(mu: SpectralMeasure) -> float:
    return math.fsum([a.w for a in mu.atoms] + [s.mass for s in mu.segments])


def ball_mass(mu: SpectralMeasure, center: float, radius: float) -> float:
    """Mass of the open interval ``(center - radius, center + radius)``."""
    if not radius > 0:
        raise ValueError("radius must be > 0")
    lo, hi = center - radius, center + radius
    parts = [a.w for a in mu.atoms if lo < a.y < hi]
    parts += [s.mass_in(lo, hi) for s in mu.segments]
    return math.fsum(parts)


def left_mass(mu: SpectralMeasure, eps: float) -> float:
    """Mass of the closed interval ``[-eps, 0]``."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    parts = [a.w for a in mu.atoms if -eps <= a.y]
    parts += [s.mass_in(-eps, 0.0) for s in mu.segments]
    return math.fsum(parts)


def orbit_log_norm2(mu: SpectralMeasure, t: float) -> float:
    """``ln ∫ e^{2ty} dmu(y)``."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    if mu.is_zero:
        raise MeasureEmpty("orbit norm of the zero measure")
    terms = [math.log(a.w) + 2.0 * t * a.y for a in mu.atoms]
    terms += [s.log_laplace(t) for s in mu.segments]
    return log_sum_exp(terms)


def restrict(mu: SpectralMeasure, k: int) -> SpectralMeasure:
    """Keep the mass on ``(-inf, -1/k)`` and any atom at 0."""
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    c = -1.0 / k
    atoms = tuple(a for a in mu.atoms if a.y < c or a.y == 0)
    segs = tuple(s2 for s2 in (s.clip_below(c) for s in mu.segments) if s2 is not None)
    return SpectralMeasure(atoms, segs)


def blend(mu_main: SpectralMeasure, mu_witness: SpectralMeasure, c: float) -> SpectralMeasure:
    """``mu_main + c^2 mu_witness``; coincident atoms merge."""
    if not c > 0:
        raise ValueError("c must be > 0")
    c2 = c * c
    weights: dict[float, float] = {}
    for a in mu_main.atoms:
        weights[a.y] = a.w
    for a in mu_witness.atoms:
        weights[a.y] = weights.get(a.y, 0.0) + c2 * a.w
    segs = tuple(mu_main.segments) + tuple(s.scaled(c2) for s in mu_witness.segments)
    return SpectralMeasure(tuple(Atom(y, w) for y, w in weights.items()), segs)


@dataclass(frozen=True)
class OrbitSeries:
    """Sampled times and ``ln ||e^{tN}x||^2`` values."""

    t: tuple[float, ...]
    log_norm2: tuple[float, ...]

    def __post_init__(self):
        if len(self.t) != len(self.log_norm2):
            raise ValueError("t and log_norm2 differ in length")


def orbit_series(mu: SpectralMeasure, t_min: float, t_max: float, ratio: float = 2.0) -> OrbitSeries:
    ts = geometric_grid(t_min, t_max, ratio)
    return OrbitSeries(tuple(float(t) for t in ts), tuple(orbit_log_norm2(mu, float(t)) for t in ts))


# ------------------------------------------------------------ serialization

def _num(doc: dict, key: str, where: str) -> float:
    if key not in doc:
        raise InvalidMeasure(f"{where}.{key}: missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidMeasure(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _pair(doc: dict, key: str, where: str) -> tuple[float, float]:
    v = doc.get(key)
    if not (isinstance(v, list) and len(v) == 2):
        raise InvalidMeasure(f"{where}.{key}: expected [a, b]")
    return (_num({"a": v[0]}, "a", f"{where}.{key}[0]"), _num({"b": v[1]}, "b", f"{where}.{key}[1]"))


def _expr_field(doc: dict, key: str, where: str) -> Expr:
    text = doc.get(key)
    if not isinstance(text, str):
        raise InvalidMeasure(f"{where}.{key}: expected an expression string")
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        err = InvalidMeasure(f"{where}.{key}: {exc}")
        err.field, err.offset = f"{where}.{key}", exc.offset
        raise err from None


def measure_from_doc(doc: dict) -> SpectralMeasure:
    if not isinstance(doc, dict):
        raise InvalidMeasure("measure document must be an object")
    unknown = set(doc) - {"atoms", "segments"}
    if unknown:
        raise InvalidMeasure(f"measure: unknown field(s) {sorted(unknown)}")
    atoms = []
    for i, a in enumerate(doc.get("atoms", [])):
        where = f"atoms[{i}]"
        if not isinstance(a, dict):
            raise InvalidMeasure(f"{where}: expected an object")
        atoms.append(Atom(_num(a, "y", where), _num(a, "w", where)))
    segs = []
    for i, s in enumerate(doc.get("segments", [])):
        where = f"segments[{i}]"
        if not isinstance(s, dict):
            raise InvalidMeasure(f"{where}: expected an object")
        kind = s.get("kind")
        try:
            if kind == "power":
                segs.append(PowerSegment(_num(s, "gamma", where), _num(s, "mass", where), _pair(s, "support", where)))
            elif kind == "arcsine":
                sup = _pair(s, "support", where) if "support" in s else None
                scale = _num(s, "scale", where) if "scale" in s else 1.0
                segs.append(ArcsineSegment(_num(s, "halfwidth", where), sup, scale))
            elif kind == "expr":
                scale = _num(s, "scale", where) if "scale" in s else 1.0
                dens = _expr_field(s, "density", where)
                if "map" in s:
                    segs.append(ExprSegment(dens, None, scale, _expr_field(s, "map", where),
                                            _pair(s, "param_support", where)))
                else:
                    segs.append(ExprSegment(dens, _pair(s, "support", where), scale))
            else:
                raise InvalidMeasure(f"{where}.kind: expected power, arcsine or expr, got {kind!r}")
        except InvalidMeasure as exc:
            msg = str(exc)
            raise InvalidMeasure(msg if msg.startswith(where) else f"{where}: {msg}") from None
    return SpectralMeasure(tuple(atoms), tuple(segs))


def measure_to_doc(mu: SpectralMeasure) -> dict:
    return {
        "atoms": [{"y": a.y, "w": a.w} for a in mu.atoms],
        "segments": [s.to_doc() for s in mu.segments],
    }


def dumps(mu: SpectralMeasure) -> str:
    return json.dumps(measure_to_doc(mu), indent=2) + "\n"


def loads(text: str) -> SpectralMeasure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidMeasure(f"measure document is not valid JSON: {exc}") from None
    return measure_from_doc(doc)


def squared(weight: Expr) -> Expr:
    """Density expression ``weight * weight``."""
    return Mul(weight, weight)
