from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from nilspec.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_example_rows(capsys):
    code, out, err = call(capsys, "spectrum", "--n", "1", "--p", "1", "--k", "1", "--gamma-max", "1")
    assert code == 0 and "ok=True" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["gamma"], float(r["eigenvalue"])) for r in rows[:3]] == [("-1", 1.0), ("0", 2.0), ("0", 4.0)]
    assert rows[0]["catalog_family"] == "1"


def test_spectrum_json(capsys):
    code, out, _ = call(capsys, "spectrum", "--n", "2", "--p", "1", "--k", "0.5", "--gamma-max", "2",
                        "--format", "json")
    assert code == 0
    assert json.loads(out)


def test_ns_example(capsys):
    code, out, _ = call(capsys, "ns", "--group", "heisenberg", "--n", "1", "--p", "0")
    data = json.loads(out)
    assert code == 0 and data["alpha_closed"] == 2.0
    assert abs(data["alpha_hat"] - 2.0) < 0.02


def test_ns_dgroup_writes_csv(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    code, out, _ = call(capsys, "ns", "--group", "dgroup", "--n", "1", "--csv", str(path))
    data = json.loads(out)
    assert code == 0 and set(data) == {"lower", "upper"}
    assert (tmp_path / "trace_lower.csv").exists() and (tmp_path / "trace_upper.csv").exists()


@pytest.mark.parametrize("suite", ["appendixA", "commutators", "htype"])
def test_verify_passing_suites(capsys, suite):
    code, out, _ = call(capsys, "verify", "--suite", suite, "--n", "1", "--p", "1", "--gamma-max", "2")
    assert code == 0 and json.loads(out)["ok"]


def test_verify_dgroup_literal_fails(capsys):
    code, _, _ = call(capsys, "verify", "--suite", "dgroup", "--n", "2", "--literal")
    assert code == 1
    code, _, _ = call(capsys, "verify", "--suite", "dgroup", "--n", "2")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["spectrum", "--n", "0", "--p", "0"],
    ["spectrum", "--n", "1", "--p", "9"],
    ["spectrum", "--n", "1"],
    ["ns", "--group", "heisenberg", "--n", "1"],
    ["ns", "--group", "heisenberg", "--n", "1", "--p", "0", "--t-min", "10", "--t-max", "1"],
    ["verify", "--suite", "nope"],
    ["--workers", "0", "dgroup", "--n", "1"],
])
def test_bad_arguments_exit_2(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2 and err.startswith("nilspec: error:") and err.count("\n") == 1


def test_output_is_deterministic(capsys):
    argv = ["dgroup", "--n", "1"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b


def test_sweep(capsys, tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"command": "spectrum", "grid": {"k": [0.5, 1.0]},
                               "params": {"n": 1, "p": 0, "gamma_max": 2}}))
    code, out, _ = call(capsys, "sweep", str(cfg))
    data = json.loads(out)
    assert code == 0 and [r["params"]["k"] for r in data["runs"]] == [0.5, 1.0]
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert call(capsys, "sweep", str(bad))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nilspec", "spectrum", "--n", "1", "--p", "0",
                           "--gamma-max", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("gamma,")
