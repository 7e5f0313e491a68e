import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import QUBIT_MT
from orbitqsl.cli import main
from orbitqsl.cptp import canonical_hamiltonian
from orbitqsl.numerics import matrix_to_json
from orbitqsl.reproduce import qubit_hamiltonian

QUBIT = {"rho": {"bloch": [0, 0, 0.5]}, "H": matrix_to_json(qubit_hamiltonian()), "T": math.pi / 2}


def run(capsys, tmp_path, args, doc=None):
    if doc is not None:
        path = tmp_path / "in.json"
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        args = [*args, "--input", str(path)]
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_qubit(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, ["bound", "--deterministic"], QUBIT)
    assert code == 0
    doc = json.loads(out)
    assert "generated_at" not in doc
    rep = doc["results"][0]
    assert abs(rep["mt_bound"] - QUBIT_MT) < 1e-12
    assert abs(rep["ml_bound"] - math.pi / 2) < 1e-12
    assert abs(rep["bures_baseline_bound"] - 0.484179259988322113) < 1e-12


def test_bound_zero_hamiltonian(capsys, tmp_path):
    doc = {"rho": {"bloch": [0.2, 0.1, 0.0]}, "H": {"dim": 2, "re": [[0, 0], [0, 0]]}, "T": 3.0}
    code, out, _ = run(capsys, tmp_path, ["bound"], doc)
    rep = json.loads(out)["results"][0]
    for key in ("mt_bound", "ml_bound", "combined_bound", "chau_bound", "improved_chau_bound", "bures_baseline_bound"):
        assert rep[key] == 0, key


def test_bound_instance_list_and_schedule(capsys, tmp_path):
    sampled = {
        "rho": {"bloch": [0, 0, 0.5]},
        "schedule": {"samples": [{"t": 0, "H": QUBIT["H"]}, {"t": 2, "H": QUBIT["H"]}]},
        "T": math.pi / 2,
    }
    code, out, _ = run(capsys, tmp_path, ["bound"], {"instances": [QUBIT, sampled]})
    reps = json.loads(out)["results"]
    assert code == 0 and len(reps) == 2
    assert abs(reps[1]["mt_bound"] - reps[0]["mt_bound"]) < 1e-9


def test_malformed_json_exit_2(capsys, tmp_path):
    code, out, err = run(capsys, tmp_path, ["bound"], "{not json")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "parse_error"


def test_missing_field_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, ["bound"], {"rho": {"bloch": [0, 0, 0]}})
    assert code == 2


def test_validation_error_exit_1(capsys, tmp_path):
    doc = dict(QUBIT, rho={"dim": 2, "re": [[0.6, 0], [0, 0.6]]})
    code, _, err = run(capsys, tmp_path, ["bound"], doc)
    assert code == 1
    assert json.loads(err)["error"] == "trace_not_one"


def test_tolerance_override(capsys, tmp_path):
    doc = dict(QUBIT, rho={"dim": 2, "re": [[0.6, 0], [0, 0.4 + 1e-8]]})
    assert run(capsys, tmp_path, ["bound"], doc)[0] == 1
    assert run(capsys, tmp_path, ["bound", "--tol", "trace=1e-6"], doc)[0] == 0
    assert run(capsys, tmp_path, ["bound", "--tol", "nonsense=1"], doc)[0] == 2


def test_metric(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, ["metric"], QUBIT)
    rec = json.loads(out)["results"][0]
    assert abs(rec["visibility"] - 0.204124145231931508) < 1e-14
    assert abs(rec["distance"] - 2 * math.sqrt(1 - 0.204124145231931508**2)) < 1e-14


def test_channel(capsys, tmp_path):
    doc = {
        "rho": {"bloch": [0, 0, 0.3]},
        "system": {"H_AB": matrix_to_json(canonical_hamiltonian([math.pi, 0.7, math.pi])), "dB": 2},
        "T": 1.0,
    }
    code, out, _ = run(capsys, tmp_path, ["channel"], doc)
    rec = json.loads(out)["results"][0]
    assert abs(rec["cptp_bound"] - 0.164893245945806020) < 1e-12
    assert rec["completeness_defect"] < 1e-9
    dephase = {"rho": {"bloch": [0.5, 0, 0]}, "channel": {"kraus": [{"dim": 2, "re": [[1, 0], [0, 0]]}, {"dim": 2, "re": [[0, 0], [0, 1]]}]}}
    code, out, _ = run(capsys, tmp_path, ["channel"], dephase)
    state = json.loads(out)["results"][0]["output_state"]
    assert np.allclose(state["re"], [[0.5, 0], [0, 0.5]])


def test_interfere(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, ["interfere", "--shots", "1000000", "--deterministic"], QUBIT)
    rec = json.loads(out)["results"][0]
    assert abs(rec["measured"]["visibility"] - 0.204124) < 0.003
    assert abs(rec["measured"]["bargmann_angle"] - 2.730455) < 0.03
    code, csv_text, _ = run(capsys, tmp_path, ["interfere", "--format", "csv", "--shots", "inf"], QUBIT)
    lines = csv_text.splitlines()
    assert lines[0] == "chi,counts_D,counts_Dprime,shots" and lines[1].endswith(",inf")


def test_reproduce_reports_mismatches(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, ["reproduce", "qubit-example", "--deterministic"])
    checks = {c["name"]: c for c in json.loads(out)["results"][0]["checks"]}
    assert code == 0
    assert checks["r_prime_rule"]["match"] is True
    assert checks["combined_bound_le_T"]["match"] is True
    assert checks["ml_saturation"]["match"] is True
    assert checks["mt_bound"]["match"] is False and checks["mt_bound"]["printed"] == 1.09


def test_reproduce_table(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, ["reproduce", "--format", "table"])
    assert code == 0
    assert "MISMATCH" in out and "cptp-example" in out and "saturation-family" in out


def test_sweep_csv_and_determinism(capsys, tmp_path):
    code, a, _ = run(capsys, tmp_path, ["sweep", "--count", "12", "--dims", "2"])
    _, b, _ = run(capsys, tmp_path, ["sweep", "--count", "12", "--dims", "2", "--jobs", "2"])
    assert code == 0 and a == b
    assert len(a.splitlines()) == 13


def test_json_byte_identical(capsys, tmp_path):
    args = ["interfere", "--shots", "5000", "--deterministic"]
    assert run(capsys, tmp_path, args, QUBIT)[1] == run(capsys, tmp_path, args, QUBIT)[1]
    _, stamped, _ = run(capsys, tmp_path, ["bound"], QUBIT)
    assert "generated_at" in json.loads(stamped)


def test_csv_rejected_for_bound(capsys, tmp_path):
    assert run(capsys, tmp_path, ["bound", "--format", "csv"], QUBIT)[0] == 1


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, tmp_path, ["metric", "--output", str(target)], QUBIT)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "metric"


def test_console_entry_point(tmp_path):
    path = tmp_path / "q.json"
    path.write_text(json.dumps(QUBIT))
    proc = subprocess.run(
        [sys.executable, "-m", "orbitqsl.cli", "bound", "-i", str(path), "-f", "table"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "mt_bound" in proc.stdout and "1.39459" in proc.stdout
