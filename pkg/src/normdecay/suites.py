"""Named verification suites behind ``normdecay verify``.

Each suite returns a list of check dictionaries carrying a verdict
(``PASS``, ``FAIL`` or ``SKIP``), the grids used, margins and the tolerances
in force. Nothing time-dependent goes into a check, so two runs on the same
inputs give identical reports.
"""

from __future__ import annotations

import math
from typing import Callable

from . import asymptotics as asy
from . import constructions as con
from .errors import ConfigError, RateViolation, SpectrumOnAxis
from .measure import Atom, SpectralMeasure, orbit_log_norm2, orbit_series
from .models import (
    LaplacianModel,
    MultiplicationModel,
    laplacian_log_norm2,
    model_gap,
    model_hash,
    semigroup_opnorm_log,
)
from .optimize import geometric_grid
from .special import scaled_bessel_orders

DEFAULT_TOLERANCES = {
    "laplacian.abs": 1e-8,
    "laplacian.parseval": 1e-8,
    "example1.slack": 2.0,
    "exponent.abs": 0.1,
    "poly.rel": 0.05,
    "bd.C_max": 64.0,
    "corollary.lower_max": 0.3,
    "corollary.upper_min": 4.0,
    "corollary.spread_min": 2.0,
}


def example1_model() -> MultiplicationModel:
    """Spectrum ``-1/ln y + i y`` for ``y >= 2``; norms decay like ``e^{-2 sqrt t}``."""
    return MultiplicationModel.from_text("1/ln(y)", "y", (2.0, math.inf))


def unit_model() -> MultiplicationModel:
    """Spectrum on the line ``Re = -1``."""
    return MultiplicationModel.from_text("1", "y", (0.0, math.inf))


def poly_model(a: float) -> MultiplicationModel:
    """Spectrum ``-y^{-a} + i y`` for ``y >= 1``: resolvent growth ``s^a``."""
    return MultiplicationModel.from_text(f"y^(-{a!r})", "y", (1.0, math.inf))


BUILTIN_MODELS: dict[str, Callable[[], object]] = {
    "example1": example1_model,
    "unit": unit_model,
    "laplacian": LaplacianModel,
}


def calibration_family() -> list[tuple[str, float, SpectralMeasure]]:
    fam = [(f"power:{g!r}", g, SpectralMeasure.power(g)) for g in (0.25, 0.5, 1.0, 2.0, 3.0)]
    fam.append(("arcsine", 0.5, SpectralMeasure.arcsine()))
    fam.append(("dirac0", 0.0, SpectralMeasure.dirac()))
    return fam


def merged_tolerances(overrides: dict[str, float] | None) -> dict[str, float]:
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise ConfigError(f"unknown tolerance {k!r}; known: {', '.join(sorted(tol))}", field="tolerance")
        tol[k] = float(v)
    return tol


def _check(name: str, ok: bool, **details) -> dict:
    return {"check": name, "verdict": "PASS" if ok else "FAIL", **details}


# ------------------------------------------------------------------ suites

def laplacian_parseval_error(t: float) -> float:
    """Relative gap between ``sum_n (e^{tΔ}δ_0)_n^2`` and the closed-form norm."""
    x = 2.0 * t
    nmax = int(math.ceil(x + 40 + 15 * math.sqrt(x)))
    ker = scaled_bessel_orders(x, nmax)
    total = math.fsum([ker[0] ** 2] + [2.0 * v * v for v in ker[1:]])
    exact = math.exp(laplacian_log_norm2(t))
    return abs(total - exact) / exact


def suite_laplacian(tol, model=None) -> list[dict]:
    out = []
    arcsine = SpectralMeasure.arcsine()
    for t in (0.1, 1.0, 10.0, 100.0):
        a = orbit_log_norm2(arcsine, t)
        b = laplacian_log_norm2(t)
        p = laplacian_parseval_error(t)
        out.append(_check(
            f"laplacian t={t!r}",
            abs(a - b) <= tol["laplacian.abs"] and p <= tol["laplacian.parseval"],
            t=t, measure_log_norm2=a, bessel_log_norm2=b, abs_error=abs(a - b), parseval_rel_error=p,
            tolerances={"abs": tol["laplacian.abs"], "parseval": tol["laplacian.parseval"]},
        ))
    return out


def suite_example1(tol, model=None) -> list[dict]:
    m = example1_model()
    ts = [float(t) for t in geometric_grid(1e2, 1e4, 10 ** 0.25)]
    pts = []
    for t in ts:
        v = semigroup_opnorm_log(m, t, 1)
        pts.append({"t": t, "log_norm": v, "deviation": abs(v + 2 * math.sqrt(t)),
                    "allowed": tol["example1.slack"] * math.log(t)})
    ok = all(p["deviation"] <= p["allowed"] for p in pts)
    return [_check("example1 rate e^{-2 sqrt t}", ok, model_hash=model_hash(m), points=pts,
                   tolerances={"slack_times_ln_t": tol["example1.slack"]})]


def suite_prop_decay_scaling(tol, model=None) -> list[dict]:
    out = []
    tt = tol["exponent.abs"]
    for name, g, mu in calibration_family():
        se = asy.scaling_exponents(mu, 0.0, 1e-8, 0.5)
        de = asy.decay_exponents(orbit_series(mu, 10.0, 1e8))
        margins = {
            "scaling_lower": tt - abs(se.lower - g),
            "scaling_upper": tt - abs(se.upper - g),
            "decay_lower": tt - abs(de.lower - g),
            "decay_upper": tt - abs(de.upper - g),
        }
        out.append(_check(
            f"calibration {name}", all(v >= 0 for v in margins.values()),
            gamma=g, scaling=[se.lower, se.upper], decay=[de.lower, de.upper], margins=margins,
            eps_window=[1e-8, 0.5], t_grid=[10.0, 1e8, 2.0], tolerances={"abs": tt},
        ))
    return out


def suite_poly_scale(tol, model=None) -> list[dict]:
    out = []
    for a in (0.5, 1.0, 2.0):
        rep = asy.poly_scale_check(poly_model(a), a, rel_tol=tol["poly.rel"])
        out.append({"check": f"poly-scale a={a!r}", "verdict": rep.verdict, "model_hash": rep.model_id,
                    **rep.details})
    return out


def _bd_one(label: str, m, tol) -> dict:
    ts = [float(t) for t in geometric_grid(10.0, 1e4, 10 ** 0.25)]
    cands = tuple(c for c in asy.DEFAULT_C if c <= tol["bd.C_max"])
    try:
        rep = asy.bd_bound_check(m, ts, cands)
    except SpectrumOnAxis as exc:
        return {"check": f"bd-bound {label}", "verdict": "SKIP", "model_hash": model_hash(m),
                "reason": "SpectrumOnAxis", "message": str(exc)}
    return {"check": f"bd-bound {label}", "verdict": rep.verdict, "model_hash": rep.model_id,
            "t_grid": ts, "C_max": tol["bd.C_max"], **rep.details}


def suite_bd_bound(tol, model=None) -> list[dict]:
    if model is not None:
        return [_bd_one("input", model, tol)]
    return [_bd_one(name, BUILTIN_MODELS[name](), tol) for name in ("example1", "unit", "laplacian")]


ERRATIC_ALPHAS = ("log", "power:1", "power:5")
ERRATIC_BETAS = ("power:1", "power:5", "exp_root:0.5")


def erratic_check(alpha_spec: str, beta_spec: str, K: int) -> dict:
    alpha, beta = con.parse_rate(alpha_spec), con.parse_rate(beta_spec)
    con.check_alpha(alpha)
    con.check_beta(beta)
    name = f"erratic alpha={alpha.spec} beta={beta.spec} K={K}"
    try:
        mu, sched = con.build_erratic(alpha, beta, K)
    except RateViolation as exc:
        return {"check": name, "verdict": "FAIL", "reason": "RateViolation", "message": str(exc)}
    rep = con.verify_erratic(mu, sched, alpha, beta)
    floor_ok = True
    floor_rows = []
    for c in sched.checkpoints:
        eps = 1.0 / c.t
        for t in (c.t, c.s):
            fl = con.jensen_floor(mu, eps, t)
            n2 = orbit_log_norm2(mu, t)
            floor_rows.append({"k": c.k, "eps": eps, "t": t, "floor": fl, "log_norm2": n2})
            floor_ok &= fl <= n2 + 1e-12 * max(1.0, abs(n2))
    ok = rep.verdict == "PASS" and rep.lemma_verdict == "PASS" and floor_ok
    return {"check": name, "verdict": "PASS" if ok else "FAIL", "guarantees": rep.verdict,
            "lemma": rep.lemma_verdict, "jensen_floor": "PASS" if floor_ok else "FAIL",
            "schedule": sched.to_doc(), "entries": rep.entries, "floor": floor_rows}


def suite_erratic(tol, model=None, depth: int = 8) -> list[dict]:
    return [erratic_check(a, b, depth) for a in ERRATIC_ALPHAS for b in ERRATIC_BETAS]


def corollary_check(tol, K: int = 8) -> dict:
    mu = con.build_corollary_measure(K)
    se = asy.scaling_exponents(mu, 0.0, 2.0 ** -256, 0.25)
    ts = tuple(float(t) for t in geometric_grid(10.0, 1e60, 2.0))
    series = orbit_series(mu, 10.0, 1e60, 2.0)
    de = asy.decay_exponents(series)
    finite = all(math.isfinite(v) for v in series.log_norm2)
    spread = de.upper - de.lower
    ok = (finite and se.lower <= tol["corollary.lower_max"] and se.upper >= tol["corollary.upper_min"]
          and spread >= tol["corollary.spread_min"])
    return _check(f"corollary K={K}", ok, scaling=[se.lower, se.upper], decay=[de.lower, de.upper],
                  decay_spread=spread, eps_window=[2.0 ** -256, 0.25], t_grid=[ts[0], ts[-1], 2.0],
                  all_finite=finite,
                  tolerances={k.split(".")[1]: v for k, v in tol.items() if k.startswith("corollary.")})


def suite_corollary(tol, model=None) -> list[dict]:
    return [corollary_check(tol)]


def _growth_bound_k0(m) -> float:
    ts = geometric_grid(1.0, 1e3, 2.0)
    return asy.growth_bound([(float(t), semigroup_opnorm_log(m, float(t), 0)) for t in ts])


def suite_classifier(tol, model=None) -> list[dict]:
    out = []
    measures = [
        ("dirac0", SpectralMeasure.dirac(), con.NOT_STABLE),
        ("atom0+power", SpectralMeasure((Atom(0.0, 0.25),), SpectralMeasure.power(1.0).segments),
         con.NOT_STABLE),
        ("power:1", SpectralMeasure.power(1.0), con.STABLE_NOT_EXPONENTIAL),
        ("arcsine", SpectralMeasure.arcsine(), con.STABLE_NOT_EXPONENTIAL),
        ("atom(-1)", SpectralMeasure.dirac(-1.0), con.EXPONENTIALLY_STABLE),
    ]
    ts = [float(t) for t in geometric_grid(1.0, 1e6, 10.0)]
    for name, mu, want in measures:
        cls = con.classify_measure(mu)
        ok = cls.kind == want
        extra = {}
        if cls.kind == con.NOT_STABLE:
            floor = math.log(cls.atom_mass)
            extra["floor_ok"] = all(orbit_log_norm2(mu, t) >= floor for t in ts)
            ok &= extra["floor_ok"]
        out.append(_check(f"classify measure {name}", ok, expected=want, got=str(cls), **extra))
    models = [("unit", unit_model(), con.EXPONENTIALLY_STABLE),
              ("example1", example1_model(), con.STABLE_NOT_EXPONENTIAL)]
    if model is not None:
        models.append(("input", model, None))
    for name, m, want in models:
        mm = m.as_multiplication() if isinstance(m, LaplacianModel) else m
        cls = con.classify(model_gap(mm), 0.0)
        ok = want is None or cls.kind == want
        extra = {}
        if cls.kind == con.EXPONENTIALLY_STABLE:
            extra["growth_bound"] = _growth_bound_k0(mm)
            ok &= extra["growth_bound"] < 0
        out.append(_check(f"classify model {name}", ok, expected=want, got=str(cls),
                          model_hash=model_hash(m), **extra))
    return out


SUITES = {
    "laplacian": suite_laplacian,
    "example1-rate": suite_example1,
    "prop-decay-scaling": suite_prop_decay_scaling,
    "poly-scale": suite_poly_scale,
    "bd-bound": suite_bd_bound,
    "erratic": suite_erratic,
    "corollary": suite_corollary,
    "classifier": suite_classifier,
}


def run_suite(name: str, *, model=None, tolerances=None, depth: int = 8) -> dict:
    if name != "all" and name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; known: all, {', '.join(SUITES)}", field="suite")
    tol = merged_tolerances(tolerances)
    names = list(SUITES) if name == "all" else [name]
    checks = []
    for n in names:
        fn = SUITES[n]
        res = fn(tol, model, depth) if n == "erratic" else fn(tol, model)
        for c in res:
            c["suite"] = n
        checks.extend(res)
    verdict = "FAIL" if any(c["verdict"] == "FAIL" for c in checks) else "PASS"
    doc = {"schema": 1, "suite": name, "verdict": verdict, "tolerances": tol,
           "counts": {v: sum(c["verdict"] == v for c in checks) for v in ("PASS", "FAIL", "SKIP")},
           "checks": checks}
    if model is not None:
        doc["model_hash"] = model_hash(model)
    return doc
