"""``normdecay`` command-line front end.

Exit codes: 0 success, 2 configuration or precondition error, 3 a check
failed (its report is still written), 4 a construction could not be
completed. Errors are reported on stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import asymptotics as asy
from . import constructions as con
from . import suites
from .errors import (
    ConfigError,
    DegenerateWindow,
    ExprSyntaxError,
    InvalidMeasure,
    InvalidModel,
    MeasureEmpty,
    NotMonotone,
    OptimizationFailure,
    OutOfRange,
    RateViolation,
    SpectrumOnAxis,
)
from .expr import parse
from .measure import OrbitSeries, measure_from_doc, measure_to_doc, orbit_log_norm2
from .models import (
    LaplacianModel,
    laplacian_log_norm2,
    model_from_doc,
    model_gap,
    model_hash,
    state_measure,
)
from .optimize import geometric_grid
from .reports import SCHEMA_VERSION, csv_text, dumps_json, svg_decay_plot

EXIT_CONFIG = 2
EXIT_CHECK = 3
EXIT_CONSTRUCTION = 4


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, field=None, offset=None):
        super().__init__(message)
        self.code, self.kind, self.field, self.offset = code, kind, field, offset


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_CONFIG, "UsageError", message)


# ------------------------------------------------------------------ inputs

def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_CONFIG, "ConfigError", f"cannot read {what} file: {exc.strerror}", field=what) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, "ConfigError", f"{what} file is not valid JSON: {exc.msg}",
                       field=what, offset=exc.pos) from None


def load_measure(path: str):
    return measure_from_doc(_read_json(path, "measure"))


def load_model(path: str):
    """A model document, or one of the builtin names when no such file exists."""
    if not os.path.exists(path) and path in suites.BUILTIN_MODELS:
        return suites.BUILTIN_MODELS[path]()
    return model_from_doc(_read_json(path, "model"))


def _t_grid(args, lo: float, hi: float, ratio: float = 2.0):
    t_min = lo if args.t_min is None else args.t_min
    t_max = hi if args.t_max is None else args.t_max
    r = ratio if args.ratio is None else args.ratio
    if not t_min > 0:
        raise ConfigError("t-min must be > 0", field="t-min")
    if not t_max >= t_min:
        raise ConfigError("t-max must be >= t-min", field="t-max")
    if not r > 1:
        raise ConfigError("ratio must be > 1", field="ratio")
    return [float(t) for t in geometric_grid(t_min, t_max, r)]


def _tolerances(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance {item!r} is not NAME=VALUE", field="tolerance")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {name!r}: {value!r} is not a number", field="tolerance") from None
    suites.merged_tolerances(out)  # rejects unknown names
    return out


def _emit(text: str, out_dir: str | None, filename: str) -> None:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, filename), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for this command", field=name)
    return val


# ---------------------------------------------------------------- commands

def cmd_orbit(args) -> int:
    ts = _t_grid(args, 1.0, 1e4)
    if args.measure:
        mu = load_measure(args.measure)
        vals = [orbit_log_norm2(mu, t) for t in ts]
    else:
        model = load_model(_need(args, "model"))
        if isinstance(model, LaplacianModel) and args.weight is None:
            vals = [laplacian_log_norm2(t) for t in ts]
        else:
            if args.weight is None or args.support is None:
                raise ConfigError("--weight and --support describe the state for a multiplication model",
                                  field="weight")
            m = model.as_multiplication() if isinstance(model, LaplacianModel) else model
            mu = state_measure(m, parse(args.weight), args.support)
            vals = [orbit_log_norm2(mu, t) for t in ts]
    _emit(csv_text(("t", "log_norm2"), zip(ts, vals)), args.out, "orbit.csv")
    return 0


def cmd_exponents(args) -> int:
    mu = load_measure(_need(args, "measure"))
    eps_min = 1e-8 if args.eps_min is None else args.eps_min
    eps_max = 0.5 if args.eps_max is None else args.eps_max
    se = asy.scaling_exponents(mu, args.at, eps_min, eps_max)
    ts = _t_grid(args, 10.0, 1e8)
    de = asy.decay_exponents(OrbitSeries(tuple(ts), tuple(orbit_log_norm2(mu, t) for t in ts)))
    doc = {
        "schema": SCHEMA_VERSION,
        "command": "exponents",
        "point": args.at,
        "scaling": {"lower": se.lower, "upper": se.upper, "window": se.scale_window, "samples": se.samples},
        "decay": {"lower": de.lower, "upper": de.upper, "window": de.scale_window, "samples": de.samples},
    }
    _emit(dumps_json(doc), args.out, "exponents.json")
    return 0


def cmd_resolvent(args) -> int:
    model = load_model(_need(args, "model"))
    y_max = args.y_max
    if not (y_max > 0 and math.isfinite(y_max)):
        raise ConfigError("y-max must be finite and > 0", field="y-max")
    prof = asy.resolvent_profile(model, y_max)
    _emit(csv_text(("s", "M", "M_log"), zip(prof.y, prof.M, prof.M_log)), args.out, "resolvent.csv")
    return 0


def _report(doc: dict, out_dir, filename) -> int:
    _emit(dumps_json(doc), out_dir, filename)
    return EXIT_CHECK if doc.get("verdict") == "FAIL" else 0


def cmd_bound_check(args) -> int:
    model = load_model(_need(args, "model"))
    ts = _t_grid(args, 10.0, 1e4, 10 ** 0.25)
    tol = suites.merged_tolerances(_tolerances(args.tolerance))
    cands = tuple(c for c in asy.DEFAULT_C if c <= tol["bd.C_max"])
    doc = {"schema": SCHEMA_VERSION, "command": "bound-check", "model_hash": model_hash(model), "t_grid": ts}
    try:
        rep = asy.bd_bound_check(model, ts, cands)
        doc.update(verdict=rep.verdict, **rep.details)
    except SpectrumOnAxis as exc:
        doc.update(verdict="SKIP", reason="SpectrumOnAxis", message=str(exc))
    return _report(doc, args.out, "bound_check.json")


def cmd_poly_check(args) -> int:
    model = load_model(_need(args, "model"))
    tol = suites.merged_tolerances(_tolerances(args.tolerance))
    rep = asy.poly_scale_check(model, _need(args, "a"), args.b, rel_tol=tol["poly.rel"])
    doc = {"schema": SCHEMA_VERSION, "command": "poly-check", "model_hash": rep.model_id,
           "verdict": rep.verdict, **rep.details}
    return _report(doc, args.out, "poly_check.json")


def cmd_erratic(args) -> int:
    alpha = con.parse_rate(_need(args, "alpha"))
    beta = con.parse_rate(_need(args, "beta"))
    con.check_alpha(alpha)
    con.check_beta(beta)
    K = args.depth
    if K < 1:
        raise ConfigError("depth must be >= 1", field="depth")
    mu, sched = con.build_erratic(alpha, beta, K)
    rep = con.verify_erratic(mu, sched, alpha, beta)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    _emit(dumps_json({"schema": SCHEMA_VERSION, **measure_to_doc(mu)}), out, "measure.json")
    _emit(dumps_json({"schema": SCHEMA_VERSION, "alpha": alpha.spec, "beta": beta.spec, **sched.to_doc()}),
          out, "schedule.json")
    lo = sched.checkpoints[0].t / 2
    hi = sched.checkpoints[-1].s * 2
    ts = [float(t) for t in geometric_grid(lo, hi, 2.0 ** 0.25)]
    curve = [0.5 * orbit_log_norm2(mu, t) for t in ts]
    markers = []
    for e in rep.entries:
        markers.append((e["t"], 0.5 * e["log_norm2_t"], f"t{e['k']}"))
        markers.append((e["s"], 0.5 * e["log_norm2_s"], f"s{e['k']}"))
    title = f"alpha={alpha.spec} beta={beta.spec} K={K}"
    _emit(svg_decay_plot(ts, curve, markers, title), out, "erratic.svg")
    doc = {"schema": SCHEMA_VERSION, "command": "erratic", "alpha": alpha.spec, "beta": beta.spec, "K": K,
           "verdict": rep.verdict, "lemma_verdict": rep.lemma_verdict, "entries": rep.entries}
    _emit(dumps_json(doc), out, "erratic_report.json")
    sys.stdout.write(dumps_json({"verdict": rep.verdict, "lemma_verdict": rep.lemma_verdict, "out": out}))
    return 0 if rep.passed else EXIT_CHECK


def cmd_classify(args) -> int:
    if args.measure:
        mu = load_measure(args.measure)
        cls = con.classify_measure(mu)
        doc = {"schema": SCHEMA_VERSION, "command": "classify", "input": "measure",
               "gap": mu.gap if not mu.is_zero else math.inf, "atom_at_zero": mu.atom_at_zero}
    else:
        model = load_model(_need(args, "model"))
        m = model.as_multiplication() if isinstance(model, LaplacianModel) else model
        gap = model_gap(m)
        cls = con.classify(gap, 0.0)
        doc = {"schema": SCHEMA_VERSION, "command": "classify", "input": "model", "model_hash": model_hash(model),
               "gap": gap, "atom_at_zero": 0.0}
    doc.update(kind=cls.kind, atom_mass=cls.atom_mass, label=str(cls))
    _emit(dumps_json(doc), args.out, "classify.json")
    return 0


def cmd_verify(args) -> int:
    model = load_model(args.model) if args.model else None
    doc = suites.run_suite(_need(args, "suite"), model=model, tolerances=_tolerances(args.tolerance),
                           depth=args.depth)
    text = dumps_json(doc)
    if args.out:
        _emit(text, args.out, f"verify_{args.suite}.json")
    sys.stdout.write(text)
    return EXIT_CHECK if doc["verdict"] == "FAIL" else 0


COMMANDS = {
    "orbit": cmd_orbit,
    "exponents": cmd_exponents,
    "resolvent": cmd_resolvent,
    "bound-check": cmd_bound_check,
    "poly-check": cmd_poly_check,
    "erratic": cmd_erratic,
    "classify": cmd_classify,
    "verify": cmd_verify,
}


def _support(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected A,B")
    return tuple(float(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="normdecay", description="Orbit decay of normal semigroups from spectral data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--measure", metavar="PATH")
        s.add_argument("--model", metavar="PATH")
        s.add_argument("--t-min", type=float)
        s.add_argument("--t-max", type=float)
        s.add_argument("--ratio", type=float)
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--tolerance", action="append", metavar="NAME=VALUE")
        if name == "orbit":
            s.add_argument("--weight", metavar="EXPR", help="state weight as a function of y")
            s.add_argument("--support", type=_support, metavar="A,B", help="parameter interval of the state")
        if name == "exponents":
            s.add_argument("--eps-min", type=float)
            s.add_argument("--eps-max", type=float)
            s.add_argument("--at", type=float, default=0.0, help="point w of the scaling exponents")
        if name == "resolvent":
            s.add_argument("--y-max", type=float, default=1e6)
        if name == "poly-check":
            s.add_argument("--a", type=float)
            s.add_argument("--b", type=float, default=0.0)
        if name in ("erratic", "verify"):
            s.add_argument("--depth", type=int, default=8, metavar="K")
        if name == "erratic":
            s.add_argument("--alpha", metavar="SPEC")
            s.add_argument("--beta", metavar="SPEC")
        if name == "verify":
            s.add_argument("--suite", metavar="NAME")
    return p


_CONFIG_ERRORS = (ConfigError, InvalidMeasure, InvalidModel, ExprSyntaxError, MeasureEmpty, NotMonotone,
                  DegenerateWindow, OutOfRange, SpectrumOnAxis, ValueError)


def _error_object(exc: BaseException, code: int) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("field", "offset"):
        val = getattr(exc, attr, None)
        if val is not None:
            err[attr] = val
    if isinstance(exc, CliError):
        err["type"] = exc.kind
    return {"error": err}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        code = exc.code
        err = exc
    except RateViolation as exc:
        code, err = EXIT_CONSTRUCTION, exc
    except OptimizationFailure as exc:
        code, err = EXIT_CHECK, exc
    except _CONFIG_ERRORS as exc:
        code, err = EXIT_CONFIG, exc
    sys.stderr.write(json.dumps(_error_object(err, code), sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
