import io
import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from formalstar.cli import run

SETUPS = Path(__file__).resolve().parent.parent / "setups"
SO3, SYMPL, LIN = (str(SETUPS / n) for n in ("so3.json", "symplectic.json", "linear_x1.json"))
CYCLE = str(SETUPS / "two_cycle_graph.json")

SCHEMA = json.loads(resources.files("formalstar").joinpath("data/report_schema.json").read_text())


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--json")
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    return code, report


def test_star_prints_moyal_value():
    code, out, _ = call("star", "--input", SYMPL, "--order", "2", "-f", "x1", "-g", "x2")
    assert code == 0
    assert out.strip() == "x1*x2 + 1/2*h"


def test_flagship_verification_on_so3():
    code, rep = call_json("verify", "deformed-bracket", "--input", SO3, "--order", "2")
    assert code == 0 and rep["verdict"] == "pass"
    assert {c["name"] for c in rep["checks"]} == {"deformed-bracket", "deformed-bracket-sharp"}


def test_quadrature_on_vanishing_graph():
    code, rep = call_json("weights", "quadrature", "--graph", CYCLE, "--seed", "3", "--samples", "200000",
                          "--tol", "0.01")
    assert code == 0
    (q,) = rep["quadrature"]
    assert q["status"] == "pass" and abs(q["mean"]) < 0.01 and rep["seed"] == 3


@pytest.mark.parametrize("setup", [SO3, SYMPL, LIN])
def test_verify_all(setup):
    code, rep = call_json("verify", "all", "--input", setup, "--trials", "5")
    assert code == 0, [c for c in rep["checks"] if c["status"] != "pass"]
    assert rep["verdict"] == "pass"


def test_non_poisson_input_fails():
    code, rep = call_json("poisson-check", "--dim", "4", "--gamma", "d1^d2 + x1*d3^d4", "--order", "0")
    assert code == 1 and rep["verdict"] == "fail"
    (check,) = rep["checks"]
    assert check["lowest_nonzero_order"] == 0 and "d2^d3^d4" in check["lowest_nonzero_value"]


def test_input_errors_exit_2():
    code, _, err = call("star", "--dim", "2", "--gamma", "d1^^d2")
    assert code == 2 and "column" in err and "^" in err
    assert call("star", "--input", "/nonexistent.json")[0] == 2
    assert call("star", "--input", LIN, "--order", "3")[0] == 2
    assert call("verify", "nonsense")[0] == 2
    assert call("star", "--dim", "4", "--gamma", "d1^d2 + x1*d3^d4")[0] == 2


def test_bad_setup_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"dimension": 2, "gamma": [[{"i": 2, "j": 1, "poly": "1"}]]}))
    assert call("star", "--input", str(p))[0] == 2
    p.write_text("{not json")
    assert call("star", "--input", str(p))[0] == 2


def test_setup_from_stdin(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(Path(SYMPL).read_text()))
    code, out, _ = call("star", "--input", "-", "-f", "x2", "-g", "x1")
    assert code == 0 and out.strip() == "x1*x2 - 1/2*h"


def test_structured_gamma_entries(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"dimension": 2, "variables": ["q", "p"], "order": 1,
                             "gamma": [[{"i": 1, "j": 2, "poly": "1"}], []]}))
    code, out, _ = call("star", "--input", str(p), "-f", "q", "-g", "p")
    assert code == 0 and out.strip() == "q*p + 1/2*h"


def test_brackets_and_hochschild():
    code, out, _ = call("bracket", "schouten", "--dim", "4", "-a", "d1^d2", "-b", "x1*d3^d4")
    assert code == 0 and out.strip() == "d2^d3^d4"
    code, out, _ = call("bracket", "poisson", "--input", SO3, "-f", "x1", "-g", "x2")
    assert code == 0 and out.strip() == "x3"
    assert call("bracket", "gerstenhaber", "--dim", "2", "-a", "d1", "-b", "x1*d2")[0] == 0
    assert call("hochschild", "--dim", "2", "-a", "x1*d1")[0] == 0


# every subcommand must produce a report that validates against the schema
SUBCOMMANDS = [
    ("star", "--input", SO3),
    ("star", "--input", SYMPL, "-f", "x1", "-g", "x2"),
    ("bracket", "schouten", "--dim", "2", "-a", "d1", "-b", "x1*d1"),
    ("bracket", "gerstenhaber", "--dim", "2", "-a", "d1", "-b", "x1*d2"),
    ("bracket", "poisson", "--input", SO3, "-f", "x1", "-g", "x2"),
    ("hochschild", "--dim", "2", "-a", "d1"),
    ("poisson-check", "--input", SO3),
    ("phi", "--input", SO3),
    ("psi", "--input", SO3, "-a", "x2*d1", "-b", "x1*d3"),
    ("curvature", "--input", SO3),
    ("sharp", "--input", SO3),
    ("gauge", "bivector", "--input", SO3),
    ("gauge", "star", "--input", SYMPL, "-Y", "x1*d1"),
    ("weights", "table"),
    ("weights", "quadrature", "--graph", CYCLE, "--samples", "20000", "--tol", "0.1"),
    ("graphs", "--arities", "2,2"),
    ("verify", "coderivation-exp", "--trials", "3"),
    ("verify", "hamiltonian-coderivation", "--input", SO3),
    ("verify", "tangent-bracket", "--input", SO3),
    ("verify", "gauge-vector-field", "--input", SYMPL, "-Y", "x1*d1"),
    ("verify", "moyal", "--input", SYMPL),
]


@pytest.mark.parametrize("argv", SUBCOMMANDS, ids=lambda a: " ".join(a[:2]))
def test_json_reports_validate(argv):
    code, rep = call_json(*argv)
    assert code == 0
    assert rep["schema"] == "formalstar.report/1"
    assert rep["command"][0] == argv[0]


def test_exit_codes_are_deterministic():
    argv = ("weights", "quadrature", "--graph", CYCLE, "--samples", "20000", "--seed", "5", "--json")
    a, b = call(*argv), call(*argv)
    assert a[0] == b[0]
    ra, rb = json.loads(a[1]), json.loads(b[1])
    assert ra["quadrature"] == rb["quadrature"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "formalstar.cli", "star", "--input", SYMPL, "-f", "x1", "-g", "x2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "x1*x2 + 1/2*h"
