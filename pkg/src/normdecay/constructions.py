"""Explicit measures with prescribed decay behaviour, and the stability classifier.

The erratic builder places one atom per stage. Stage ``k`` picks a time
``t_k`` where a heavy atom near 0 keeps ``alpha(t) ||e^{tN}x||`` large, then a
later time ``s_k`` where every atom placed so far has decayed enough to make
``beta(s) ||e^{sN}x||`` small. Later atoms are light enough not to spoil the
earlier checkpoints. All times live on the grid ``2^i`` and every comparison
is carried out on logarithms, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ExprSyntaxError, Inconsistent, RateViolation
from .expr import Call, Div, Expr, Mul, Pow, evaluate, parse, to_text
from .measure import Atom, SpectralMeasure, ball_mass, blend, left_mass, orbit_log_norm2, restrict
from .special import log_sum_exp

LN2 = math.log(2.0)
MAX_GRID_EXPONENT = 1020  # 2^i must stay a finite double, 2^-(i+1) a normal one


# ------------------------------------------------------------------ rates

@dataclass(frozen=True)
class RateFunction:
    """A positive function of ``t > 0`` used as a growth (alpha) or decay (beta) rate.

    Kinds: ``log`` is ``ln(1+t)``, ``power`` is ``t^p``, ``exp_root`` is
    ``exp(t^c)`` and ``expr`` is an expression in ``t``.
    """

    kind: str
    param: float | None = None
    expr: Expr | None = None

    def __post_init__(self):
        if self.kind not in ("log", "power", "exp_root", "expr"):
            raise ValueError(f"unknown rate kind {self.kind!r}")
        if self.kind in ("power", "exp_root") and not (self.param is not None and math.isfinite(self.param)):
            raise ValueError(f"{self.kind} rate needs a finite parameter")
        if self.kind == "expr" and self.expr is None:
            raise ValueError("expr rate needs an expression")

    @property
    def spec(self) -> str:
        if self.kind == "log":
            return "log"
        if self.kind == "expr":
            return to_text(self.expr)
        return f"{self.kind}:{self.param!r}"

    @property
    def monotone(self) -> bool:
        if self.kind == "log":
            return True
        if self.kind in ("power", "exp_root"):
            return self.param >= 0
        ts = np.geomspace(1e-3, 1e12, 301)
        with np.errstate(all="ignore"):
            vals = evaluate(self.expr, ts, strict=False)
        return bool(np.all(np.diff(vals) >= 0))

    def log_value_at_log(self, L: float) -> float:
        """``ln rate(e^L)``, valid far beyond the range of doubles for ``t``."""
        if self.kind == "log":
            return math.log(L + math.log1p(math.exp(-L))) if L > 0 else math.log(math.log1p(math.exp(L)))
        if self.kind == "power":
            return self.param * L
        if self.kind == "exp_root":
            return math.exp(self.param * L) if self.param * L < 709 else math.inf
        t = math.exp(L) if L < 709 else math.inf
        return self.log_value(t)

    def log_value(self, t: float) -> float:
        """``ln rate(t)`` for ``t > 0``."""
        if not t > 0:
            raise ValueError("rates are defined for t > 0")
        if self.kind != "expr":
            return self.log_value_at_log(math.log(t))
        try:
            return _log_eval(self.expr, t)
        except DomainError as exc:
            raise RateViolation(f"rate {self.spec} undefined at t = {t!r}: {exc}") from None
        except _NonPositive as exc:
            raise RateViolation(f"rate {self.spec} must be positive, got {exc.args[0]!r} at t = {t!r}") from None

    def __call__(self, t: float) -> float:
        return math.exp(self.log_value(t))


class _NonPositive(Exception):
    pass


def _log_eval(node: Expr, t: float) -> float:
    """``ln node(t)``, peeling ``exp``, products, quotients and powers so ``exp(sqrt(t))`` stays finite."""
    if isinstance(node, Call) and node.func == "exp":
        return evaluate(node.arg, t)
    if isinstance(node, Mul):
        return _log_eval(node.left, t) + _log_eval(node.right, t)
    if isinstance(node, Div):
        return _log_eval(node.left, t) - _log_eval(node.right, t)
    if isinstance(node, Pow):
        try:
            lb = _log_eval(node.base, t)
        except _NonPositive:
            pass
        else:
            return evaluate(node.exponent, t) * lb
    val = evaluate(node, t)
    if not val > 0:
        raise _NonPositive(val)
    return math.log(val)


_BUILTIN_RE = re.compile(r"^\s*(power|exp_root)\s*[:(]\s*([^)]*?)\s*\)?\s*$")


def parse_rate(text: str) -> RateFunction:
    """``log``, ``power:5`` / ``power(5)``, ``exp_root:0.5`` or an expression in ``t``."""
    s = text.strip()
    if s == "log":
        return RateFunction("log")
    m = _BUILTIN_RE.match(s)
    if m:
        try:
            p = float(m.group(2))
        except ValueError:
            raise ConfigError(f"bad parameter {m.group(2)!r} for rate {m.group(1)}", field="rate") from None
        return RateFunction(m.group(1), p)
    if s.startswith("expr:"):
        s = s[5:]
    try:
        return RateFunction("expr", None, parse(s, variables=("t",)))
    except ExprSyntaxError as exc:
        raise ConfigError(f"rate expression: {exc}", field="rate", offset=exc.offset) from None


def subexponential_diagnostic(rate: RateFunction) -> bool:
    """Numerical check that ``rate(t) e^{-eps t} -> 0`` for ``eps`` in {1, 0.1, 0.01}.

    For each ``eps`` the function ``ln rate(t) - eps t`` must be strictly
    decreasing over the last three points of a geometric grid reaching
    ``1e4/eps`` and end below -20. The test is conservative: a rate such as
    ``exp(t^0.9)``, which only drops below ``e^{0.01 t}`` near ``t = 1e20``,
    is rejected.
    """
    for eps in (1.0, 0.1, 0.01):
        ts = np.geomspace(1.0, 1e4 / eps, 41)
        try:
            h = [rate.log_value(float(t)) - eps * float(t) for t in ts]
        except (RateViolation, OverflowError):
            return False
        if any(x != x for x in h):
            return False
        tail = h[-3:]
        if not (tail[0] > tail[1] > tail[2] and tail[2] < -20):
            return False
    return True


def unbounded_diagnostic(rate: RateFunction) -> bool:
    """Numerical check that ``rate`` is nondecreasing and grows without bound."""
    if rate.kind == "log":
        return True
    if rate.kind in ("power", "exp_root"):
        return rate.param > 0
    ts = np.geomspace(1.0, 1e12, 121)
    try:
        vals = [rate.log_value(float(t)) for t in ts]
    except RateViolation:
        return False
    return all(b >= a for a, b in zip(vals, vals[1:])) and vals[-1] > max(math.log(10.0), vals[0] + math.log(2.0))


def check_alpha(rate: RateFunction) -> None:
    if not unbounded_diagnostic(rate):
        raise ConfigError(f"alpha = {rate.spec} must be nondecreasing and unbounded", field="alpha")


def check_beta(rate: RateFunction) -> None:
    if rate.kind == "exp_root" and rate.param >= 1:
        raise ConfigError(f"beta = {rate.spec} is not subexponential (need c < 1)", field="beta")
    if rate.kind == "expr" and not subexponential_diagnostic(rate):
        raise ConfigError(f"beta = {rate.spec} failed the subexponential diagnostic", field="beta")


# -------------------------------------------------------- erratic measures

@dataclass(frozen=True)
class Checkpoint:
    k: int
    t: float
    s: float
    atom_eps: float
    atom_w: float


@dataclass(frozen=True)
class ErraticSchedule:
    checkpoints: tuple[Checkpoint, ...]
    K: int
    rule: str = (
        "w_k = min(2^-k, 2^-2k / max_{j<k} beta(s_j)^2); "
        "t_k = first 2^i >= max(2 s_{k-1}, 2 t_{k-1}) with alpha(t_k) >= 4^k / sqrt(w_k); "
        "atom at -1/(2 t_k); "
        "s_k = first 2^j > t_k with beta(s_k)^2 e^{-2 s_k atom_eps_k} sum_{j<=k} w_j <= 2^-2k"
    )

    def to_doc(self) -> dict:
        return {
            "K": self.K,
            "rule": self.rule,
            "checkpoints": [
                {"k": c.k, "t": c.t, "s": c.s, "atom_eps": c.atom_eps, "atom_w": c.atom_w}
                for c in self.checkpoints
            ],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ErraticSchedule":
        cps = tuple(
            Checkpoint(int(c["k"]), float(c["t"]), float(c["s"]), float(c["atom_eps"]), float(c["atom_w"]))
            for c in doc.get("checkpoints", [])
        )
        return cls(cps, int(doc.get("K", len(cps))))


def build_erratic(alpha: RateFunction, beta: RateFunction, K: int, *, max_doublings: int = 10**6):
    """Greedy construction of a measure whose orbit is erratic at checkpoint resolution.

    Returns ``(measure, schedule)``. Raises RateViolation when a stopping rule
    cannot be met within ``max_doublings`` grid steps or before the grid time
    leaves the double range.
    """
    if int(K) != K or K < 1:
        raise ValueError("K must be an integer >= 1")
    checkpoints = []
    log_ws: list[float] = []
    max_log_beta2 = 0.0  # max over the empty set is read as 1
    i_floor = 0  # grid exponent lower bound for t_k

    def beyond(i: int, start: int, what: str) -> None:
        if i - start > max_doublings:
            raise RateViolation(f"{what} not reached within {max_doublings} grid doublings")
        if i > MAX_GRID_EXPONENT:
            raise RateViolation(f"{what} needs a grid time beyond 2^{MAX_GRID_EXPONENT}, outside double range")

    for k in range(1, K + 1):
        log_w = min(-k * LN2, -2 * k * LN2 - max_log_beta2)
        if log_w < math.log(np.finfo(float).tiny):
            raise RateViolation(f"stage {k}: atom weight e^{log_w:.1f} underflows double precision")
        target = 2 * k * LN2 - 0.5 * log_w
        i = i_floor
        while alpha.log_value_at_log(i * LN2) < target:
            i += 1
            beyond(i, i_floor, f"stage {k}: alpha >= 4^k/sqrt(w_k)")
        t_k = 2.0**i
        eps_k = 2.0 ** -(i + 1)
        log_ws.append(log_w)
        log_sum = log_sum_exp(log_ws)
        j = i + 1
        while True:
            s = 2.0**j
            if 2 * beta.log_value_at_log(j * LN2) - 2.0 * s * eps_k + log_sum <= -2 * k * LN2:
                break
            j += 1
            beyond(j, i + 1, f"stage {k}: beta decay condition")
        s_k = 2.0**j
        checkpoints.append(Checkpoint(k, t_k, s_k, eps_k, math.exp(log_w)))
        max_log_beta2 = max(max_log_beta2, 2 * beta.log_value_at_log(j * LN2))
        i_floor = j + 1
    atoms = tuple(Atom(-c.atom_eps, c.atom_w) for c in checkpoints)
    return SpectralMeasure(atoms=atoms), ErraticSchedule(tuple(checkpoints), int(K))


@dataclass
class ErraticReport:
    verdict: str
    lemma_verdict: str
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


def verify_erratic(mu: SpectralMeasure, sched: ErraticSchedule, alpha: RateFunction, beta: RateFunction) -> ErraticReport:
    """Evaluate both checkpoint guarantees and the ball-mass property.

    Margins are natural logs; a nonnegative margin means the inequality holds:

    * lower: ``alpha(t_k) ||e^{t_k N}x|| >= e^{-1} 4^k``
    * upper: ``beta(s_k) ||e^{s_k N}x|| <= sqrt(2) 2^{-k}``
    * lemma: ``mu(B(0, 1/t_k)) >= 1/alpha(t_k)``
    """
    entries = []
    for c in sched.checkpoints:
        la = alpha.log_value(c.t)
        n_t = orbit_log_norm2(mu, c.t)
        n_s = orbit_log_norm2(mu, c.s)
        lower = la + 0.5 * n_t - (2 * c.k * LN2 - 1.0)
        upper = (0.5 * LN2 - c.k * LN2) - (beta.log_value(c.s) + 0.5 * n_s)
        bm = ball_mass(mu, 0.0, 1.0 / c.t)
        lemma = (math.log(bm) + la) if bm > 0 else -math.inf
        entries.append({
            "k": c.k,
            "t": c.t,
            "s": c.s,
            "log_norm2_t": n_t,
            "log_norm2_s": n_s,
            "lower_margin": lower,
            "upper_margin": upper,
            "lemma_margin": lemma,
            "lower_ok": lower >= 0,
            "upper_ok": upper >= 0,
            "lemma_ok": lemma >= 0,
        })
    ok = all(e["lower_ok"] and e["upper_ok"] for e in entries)
    lemma_ok = all(e["lemma_ok"] for e in entries)
    return ErraticReport("PASS" if ok else "FAIL", "PASS" if lemma_ok else "FAIL", entries)


def jensen_floor(mu: SpectralMeasure, eps: float, t: float) -> float:
    """``ln(mu([-eps, 0]) e^{-2 t eps})``, a lower bound for ``ln ||e^{tN}x||^2``."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    if not t >= 0:
        raise ValueError("t must be >= 0")
    m = left_mass(mu, eps)
    return math.log(m) - 2.0 * t * eps if m > 0 else -math.inf


# -------------------------------------------------- exponent witnesses

def corollary_exponents(K: int) -> list[float]:
    """Cumulative-mass exponents ``gamma_k`` used by :func:`build_corollary_measure`."""
    g = [1.0 / K, float(K)]
    while len(g) < K:
        g.append(g[-1] / 1.9)
    return g[:K]


def build_corollary_measure(K: int) -> SpectralMeasure:
    """Measure whose scaling exponent at 0 swings between near 0 and near ``K``.

    Scales are ``eps_k = 2^(-2^k)``. The mass of ``B(0, eps_k)`` is set to
    ``eps_k^gamma_k`` with ``gamma_1 = 1/K``, ``gamma_2 = K`` and then slowly
    decreasing exponents, so the chord slope is about ``K`` just below
    ``eps_1`` and about ``gamma_K`` at the finest scale. One atom sits at
    ``-eps_k/2`` for each ``k``. ``K`` above 9 would leave the double range.
    """
    if int(K) != K or K < 2:
        raise ValueError("K must be an integer >= 2")
    if K > 9:
        raise ValueError("K > 9 needs scales below the smallest double")
    gam = corollary_exponents(K)
    eps = [2.0 ** -(2**k) for k in range(1, K + 1)]
    cum = [e**g for e, g in zip(eps, gam)] + [0.0]
    atoms = tuple(Atom(-0.5 * eps[k], cum[k] - cum[k + 1]) for k in range(K))
    return SpectralMeasure(atoms=atoms)


def build_oscillating_measure(low: float, high: float, depth: int, eps_max: float = 0.5) -> SpectralMeasure:
    """Unit-mass atomic measure whose anchored scaling chord oscillates between ``low`` and ``high``.

    On the grid ``eps_max 2^-i`` the ball mass is piecewise constant. Each
    drop pushes the chord up to ``high``, and the following plateau lets it
    relax to about ``low``. Returns the measure. Use
    :func:`oscillating_window` for the matching scale window.
    """
    levels, log2_tail = _oscillation_levels(low, high, depth)
    tails = [2.0**x for x in log2_tail] + [0.0]
    atoms = [Atom(-0.75 * eps_max, 1.0 - tails[0])]
    for k, L in enumerate(levels):
        atoms.append(Atom(-0.75 * eps_max * 2.0**-L, tails[k] - tails[k + 1]))
    return SpectralMeasure(atoms=tuple(atoms))


def oscillating_window(low: float, high: float, depth: int, eps_max: float = 0.5) -> tuple[float, float]:
    levels, _ = _oscillation_levels(low, high, depth)
    return eps_max * 2.0 ** -levels[-1], eps_max


def _oscillation_levels(low: float, high: float, depth: int):
    if not 0 < low < high:
        raise ValueError("need 0 < low < high")
    if int(depth) != depth or depth < 1:
        raise ValueError("depth must be an integer >= 1")
    levels, log2_tail = [], []
    prev = 0
    for _ in range(depth):
        log2_tail.append(-high * (prev + 1))
        L = max(prev + 1, round(high * (prev + 1) / low))
        levels.append(L)
        prev = L
    if levels[-1] > 1000 or log2_tail[-1] < -1000:
        raise ValueError("oscillation too deep for double precision; lower depth or high/low")
    return levels, log2_tail


def density_approximants(mu: SpectralMeasure, witness: SpectralMeasure, k: int) -> SpectralMeasure:
    """``restrict(mu, k) + witness / k^2``."""
    return blend(restrict(mu, k), witness, 1.0 / k)


# ---------------------------------------------------------- classification

@dataclass(frozen=True)
class StabilityClass:
    kind: str  # ExponentiallyStable | StableNotExponential | NotStable
    atom_mass: float = 0.0

    def __str__(self) -> str:
        return f"NotStable({self.atom_mass!r})" if self.kind == "NotStable" else self.kind


EXPONENTIALLY_STABLE = "ExponentiallyStable"
STABLE_NOT_EXPONENTIAL = "StableNotExponential"
NOT_STABLE = "NotStable"


def classify(gap: float, atom_at_zero: float) -> StabilityClass:
    """Stability class from the spectral gap of ``N_R`` and the eigen-mass at 0."""
    if not (gap >= 0 and atom_at_zero >= 0):
        raise ValueError("gap and atom_at_zero must be >= 0")
    if atom_at_zero > 0:
        if gap > 0:
            raise Inconsistent(f"an atom at 0 (mass {atom_at_zero!r}) contradicts a spectral gap {gap!r}")
        return StabilityClass(NOT_STABLE, float(atom_at_zero))
    if gap > 0:
        return StabilityClass(EXPONENTIALLY_STABLE)
    return StabilityClass(STABLE_NOT_EXPONENTIAL)


def classify_measure(mu: SpectralMeasure) -> StabilityClass:
    return classify(max(mu.gap, 0.0) if not mu.is_zero else math.inf, mu.atom_at_zero)
