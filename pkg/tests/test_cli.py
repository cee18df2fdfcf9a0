import json
import math
import subprocess
import sys

import pytest

from oracles import FROZEN
from normdecay.cli import main
from normdecay.reports import csv_text, dumps_json, svg_decay_plot, to_jsonable


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def rows(csv):
    lines = csv.split("\n")
    assert lines[-1] == ""
    return [line.split(",") for line in lines[1:-1]]


# orbit ----------------------------------------------------------------------

def test_orbit_dirac(capsys, tmp_path):
    m = write(tmp_path, "d.json", {"atoms": [{"y": 0, "w": 1}]})
    code, out, _ = run(capsys, "orbit", "--measure", m, "--t-min", "1", "--t-max", "8", "--ratio", "2")
    assert code == 0
    assert out.startswith("t,log_norm2\n") and "\r" not in out
    assert rows(out) == [["1.0", "0.0"], ["2.0", "0.0"], ["4.0", "0.0"], ["8.0", "0.0"]]


def test_orbit_single_atom(capsys, tmp_path):
    m = write(tmp_path, "a.json", {"atoms": [{"y": -0.5, "w": 1}]})
    code, out, _ = run(capsys, "orbit", "--measure", m, "--t-min", "1", "--t-max", "1")
    assert rows(out) == [["1.0", "-1.0"]]


def test_orbit_laplacian(capsys):
    code, out, _ = run(capsys, "orbit", "--model", "laplacian", "--t-min", "10", "--t-max", "10")
    assert code == 0
    assert float(rows(out)[0][1]) == pytest.approx(FROZEN["laplacian_log_norm2_10"], abs=1e-12)


def test_orbit_model_state(capsys, tmp_path):
    m = write(tmp_path, "m.json", {"kind": "mult", "r": "y", "v": "0", "domain": [0, 1]})
    code, out, _ = run(capsys, "orbit", "--model", m, "--weight", "1", "--support", "0,1",
                       "--t-min", "10", "--t-max", "10")
    assert code == 0
    assert float(rows(out)[0][1]) == pytest.approx(math.log((1 - math.exp(-20)) / 20), rel=1e-12)


def test_orbit_bad_measure_names_field(capsys, tmp_path):
    m = write(tmp_path, "b.json", {"segments": [{"kind": "power", "gamma": "x", "mass": 1, "support": [-1, 0]}]})
    code, _, err = run(capsys, "orbit", "--measure", m)
    assert code == 2
    assert "segments[0].gamma" in json.loads(err)["error"]["message"]


def test_model_syntax_error_offset(capsys, tmp_path):
    m = write(tmp_path, "m.json", {"kind": "mult", "r": "1/ln(y", "v": "y", "domain": [2, "inf"]})
    code, _, err = run(capsys, "resolvent", "--model", m)
    e = json.loads(err)["error"]
    assert code == 2 and e["field"] == "r" and e["offset"] == 6


def test_malformed_json_offset(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"atoms": [}')
    code, _, err = run(capsys, "orbit", "--measure", str(p))
    e = json.loads(err)["error"]
    assert code == 2 and e["offset"] == 11


def test_bad_grid(capsys):
    code, _, err = run(capsys, "orbit", "--model", "laplacian", "--ratio", "1")
    assert code == 2 and json.loads(err)["error"]["field"] == "ratio"


# verify ---------------------------------------------------------------------

def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 2 and json.loads(err)["error"]["field"] == "suite"


def test_verify_bd_bound_laplacian_skip(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "bd-bound", "--model", "laplacian")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1 and doc["verdict"] == "PASS"
    (check,) = doc["checks"]
    assert check["verdict"] == "SKIP" and check["reason"] == "SpectrumOnAxis"


def test_verify_prop_decay_scaling(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "prop-decay-scaling", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["verdict"] == "PASS"
    assert (tmp_path / "verify_prop-decay-scaling.json").read_text() == out


def test_verify_failure_exit_code_still_writes_report(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "laplacian", "--tolerance", "laplacian.abs=0",
                       "--tolerance", "laplacian.parseval=0", "--out", str(tmp_path))
    assert code == 3
    assert json.loads((tmp_path / "verify_laplacian.json").read_text())["verdict"] == "FAIL"


def test_unknown_tolerance(capsys):
    code, _, err = run(capsys, "verify", "--suite", "laplacian", "--tolerance", "nope=1")
    assert code == 2 and json.loads(err)["error"]["field"] == "tolerance"


def test_verify_is_deterministic(capsys):
    _, a, _ = run(capsys, "verify", "--suite", "classifier")
    _, b, _ = run(capsys, "verify", "--suite", "classifier")
    assert a == b


# erratic --------------------------------------------------------------------

def test_erratic_writes_files(capsys, tmp_path):
    code, out, _ = run(capsys, "erratic", "--alpha", "power:5", "--beta", "power:1", "--depth", "8",
                       "--out", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["erratic.svg", "erratic_report.json", "measure.json", "schedule.json"]
    sched = json.loads((tmp_path / "schedule.json").read_text())
    assert [c["k"] for c in sched["checkpoints"]] == list(range(1, 9))
    svg = (tmp_path / "erratic.svg").read_text()
    assert svg.startswith("<svg") and ">t8<" in svg and ">s8<" in svg


def test_erratic_gate(capsys, tmp_path):
    code, _, err = run(capsys, "erratic", "--alpha", "log", "--beta", "exp(t)", "--out", str(tmp_path))
    assert code == 2 and "subexponential" in json.loads(err)["error"]["message"]


def test_erratic_depth_zero(capsys, tmp_path):
    code, _, _ = run(capsys, "erratic", "--alpha", "log", "--beta", "power:5", "--depth", "0",
                     "--out", str(tmp_path))
    assert code == 2


def test_erratic_rate_violation_exit_4(capsys, tmp_path):
    code, _, err = run(capsys, "erratic", "--alpha", "log", "--beta", "power:5", "--out", str(tmp_path))
    assert code == 4 and json.loads(err)["error"]["type"] == "RateViolation"


# other commands -------------------------------------------------------------

def test_classify_and_checks(capsys, tmp_path):
    m = write(tmp_path, "n.json", {"atoms": [{"y": 0, "w": 0.25}, {"y": -1, "w": 0.75}]})
    code, out, _ = run(capsys, "classify", "--measure", m)
    assert code == 0 and json.loads(out)["label"] == "NotStable(0.25)"
    code, out, _ = run(capsys, "classify", "--model", "unit")
    assert json.loads(out)["kind"] == "ExponentiallyStable"
    code, out, _ = run(capsys, "bound-check", "--model", "laplacian")
    assert code == 0 and json.loads(out)["verdict"] == "SKIP"
    pm = write(tmp_path, "p.json", {"kind": "mult", "r": "y^(-1)", "v": "y", "domain": [1, "inf"]})
    code, out, _ = run(capsys, "poly-check", "--model", pm, "--a", "1")
    assert code == 0 and json.loads(out)["verdict"] == "PASS"
    code, out, _ = run(capsys, "poly-check", "--model", pm, "--a", "3")
    assert code == 3


def test_exponents_command(capsys, tmp_path):
    m = write(tmp_path, "p.json", {"segments": [{"kind": "power", "gamma": 1, "mass": 1, "support": [-1, 0]}]})
    code, out, _ = run(capsys, "exponents", "--measure", m)
    doc = json.loads(out)
    assert code == 0
    assert doc["scaling"]["lower"] == pytest.approx(1.0, abs=1e-6)
    assert doc["decay"]["upper"] == pytest.approx(1.0, abs=0.05)


def test_resolvent_csv(capsys):
    code, out, _ = run(capsys, "resolvent", "--model", "unit", "--y-max", "4")
    assert code == 0 and out.splitlines()[0] == "s,M,M_log"
    assert rows(out)[0] == ["0.0", "1.0", repr(math.log(2))]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "normdecay.cli", "verify", "--suite", "nope"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and json.loads(res.stderr)["error"]["exit_code"] == 2


# reports --------------------------------------------------------------------

def test_json_non_finite_values():
    assert to_jsonable({"a": math.inf, "b": [-math.inf, math.nan], "c": (1, 2.5)}) == {
        "a": "inf", "b": ["-inf", "nan"], "c": [1, 2.5]}
    text = dumps_json({"x": 0.1})
    assert text == '{\n  "x": 0.1\n}\n'


def test_csv_shortest_roundtrip():
    text = csv_text(("a", "b"), [(0.1, 1 / 3), (math.inf, "k")])
    assert text == f"a,b\n0.1,{1 / 3!r}\ninf,k\n"


def test_svg_deterministic():
    a = svg_decay_plot([1, 10, 100], [0, -1, -2], [(10, -1, "t1")], "x<y")
    assert a == svg_decay_plot([1, 10, 100], [0, -1, -2], [(10, -1, "t1")], "x<y")
    assert "x&lt;y" in a
