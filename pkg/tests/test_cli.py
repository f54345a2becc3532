"""Command-line behaviour: outputs, exit codes and reproducibility."""

import csv
import io
import json
import os
import subprocess
import sys

import pytest

from cubecert import cli, harness


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


@pytest.fixture
def grid_csv(tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text("".join(f"{a},{b},{c}\n" for a in (0.25, 0.75) for b in (0.25, 0.75) for c in (0.25, 0.75)))
    return str(path)


# ---------------------------------------------------------------------------
# plan / bounds


def test_plan_nonperiodic(capsys):
    code, out, _ = run(capsys, "plan", "--eps", "0.01", "--d", "3", "--r", "2")
    assert code == 0
    got = kv(out)
    assert (got["n_upper"], got["s_star"], got["m"]) == ("216", "2", "6")
    assert got["rule"] == "6-point gauss per axis"
    assert "n_lower" in got and "delta" in got


def test_plan_periodic_json(capsys):
    code, out, _ = run(capsys, "plan", "--eps", "0.1", "--d", "2", "--r", "1", "--periodic", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["report"]["n_upper"] == 4 and doc["report"]["m"] == 2


def test_plan_csv(capsys):
    code, out, _ = run(capsys, "plan", "--eps", "0.01", "--d", "3", "--r", "2", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and row["n_upper"] == "216"


@pytest.mark.parametrize("argv, flag", [
    (["plan", "--eps", "1.5", "--d", "2", "--r", "1"], "epsilon must lie in (0,1)"),
    (["plan", "--eps", "0", "--d", "2", "--r", "1"], "epsilon must lie in (0,1)"),
    (["plan", "--eps", "0.1", "--d", "0", "--r", "1"], "--d"),
    (["plan", "--eps", "0.1", "--d", "2", "--r", "0"], "--r"),
    (["plan", "--eps", "0.1", "--d", "2"], "--r"),
    (["plan", "--eps", "abc", "--d", "2", "--r", "1"], "--eps"),
    (["bounds", "--eps", "0.1", "--d", "3..1", "--r", "1"], "--d"),
    (["integrate", "--rule", "simpson", "--m", "3"], "--rule"),
    (["integrate", "--rule", "gauss", "--m", "0"], "--m"),
    (["verify", "--suite", "nope"], "--suite"),
    (["verify", "--suite", "bounds", "--threads", "0"], "--threads"),
])
def test_usage_errors(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_USAGE
    assert flag in err


def test_bounds_grid(capsys):
    code, out, _ = run(capsys, "bounds", "--eps", "0.1,0.01", "--d", "1..20", "--r", "1..3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 * 20 * 3
    assert tuple(rows[0]) == harness.CSV_HEADER
    code, out, _ = run(capsys, "bounds", "--eps", "0.1", "--d", "1,3", "--r", "2", "--geometry", "both",
                       "--format", "json")
    doc = json.loads(out)
    assert doc["schema_version"] == 1 and len(doc["rows"]) == 4


# ---------------------------------------------------------------------------
# integrate


def test_integrate_midpoint_sawtooth(capsys):
    code, out, _ = run(capsys, "integrate", "--rule", "midpoint", "--m", "10", "--d", "1", "--witness", "sawtooth")
    got = kv(out)
    assert code == 0
    assert float(got["error"]) == pytest.approx(0.025, abs=1e-15)
    assert float(got["bound"]) == pytest.approx(0.025, abs=1e-15)


def test_integrate_gauss_exact(capsys):
    code, out, _ = run(capsys, "integrate", "--rule", "gauss", "--m", "2", "--d", "2", "--witness", "poly3",
                       "--format", "json")
    res = json.loads(out)["result"]
    assert code == 0 and res["error"] <= 1e-12


def test_integrate_cap(capsys):
    code, _, err = run(capsys, "integrate", "--rule", "midpoint", "--m", "100", "--d", "6")
    assert code == cli.EXIT_CAP
    assert "n=10^12" in err and "exceeds cap" in err


def test_integrate_rectangle_ratio(capsys):
    code, out, _ = run(capsys, "integrate", "--rule", "rectangle_periodic", "--m", "4", "--witness", "cos",
                       "--r", "1", "--format", "json")
    res = json.loads(out)["result"]
    assert code == 0 and res["ratio_to_bound"] == pytest.approx(2.0)


def test_integrate_without_bound(capsys):
    # the witness is outside the class, so no bound is printed
    code, out, _ = run(capsys, "integrate", "--rule", "midpoint", "--m", "4", "--witness", "sawtooth", "--r", "2")
    assert code == 0 and "bound" not in kv(out)


# ---------------------------------------------------------------------------
# adversary


def test_adversary_grid(capsys, grid_csv):
    code, out, _ = run(capsys, "adversary", "--points", grid_csv, "--eps", "0.1", "--delta", "0.75",
                       "--format", "json")
    rep = json.loads(out)["report"]
    assert code == 0
    assert rep["n"] == 8 and rep["nonzero_nodes"] == [] and rep["node_values_max"] == 0.0
    assert rep["integral_estimate"] >= rep["integral_lower_bound"] - rep["integral_ci"]
    assert rep["integral_ci"] == pytest.approx(3 * rep["integral_stderr"])
    assert rep["implied_error_lower_bound"] == pytest.approx(
        (rep["integral_estimate"] - rep["integral_ci"]) / rep["normalizer"])


def test_adversary_empty(capsys, tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    code, out, _ = run(capsys, "adversary", "--points", str(path), "--d", "3", "--rho", "0.2", "--r", "2",
                       "--format", "json")
    rep = json.loads(out)["report"]
    assert code == 0
    assert rep["integral_estimate"] == 1.0
    assert rep["implied_error_lower_bound"] == pytest.approx(1 / rep["normalizer"])
    code, _, err = run(capsys, "adversary", "--points", str(path), "--rho", "0.2")
    assert code == cli.EXIT_USAGE and "dimension" in err


def test_adversary_malformed(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.1,0.2\n0.3,0.4\n0.5;0.6\n")
    code, _, err = run(capsys, "adversary", "--points", str(path), "--rho", "0.1")
    assert code == cli.EXIT_USAGE and ":3:" in err


def test_adversary_needs_radius(capsys, grid_csv):
    code, _, err = run(capsys, "adversary", "--points", grid_csv)
    assert code == cli.EXIT_USAGE and "--rho" in err
    code, _, err = run(capsys, "adversary", "--points", grid_csv, "--eps", "0.1")
    assert code == cli.EXIT_USAGE and "--delta" in err
    code, _, err = run(capsys, "adversary", "--points", grid_csv, "--rho", "4.0")
    assert code == cli.EXIT_USAGE and "--rho" in err
    code, _, err = run(capsys, "adversary", "--points", grid_csv, "--rho", "0.1", "--samples", "1")
    assert code == cli.EXIT_USAGE and "--samples" in err


def test_adversary_detects_corrupted_evaluator(capsys, grid_csv, monkeypatch):
    real = cli.fooling_eval_mc

    def corrupted(F, x, *args, **kwargs):
        if list(x) == [0.75, 0.25, 0.75]:
            return 0.5, 0.0
        return real(F, x, *args, **kwargs)

    monkeypatch.setattr(cli, "fooling_eval_mc", corrupted)
    code, _, err = run(capsys, "adversary", "--points", grid_csv, "--rho", "0.1")
    assert code == cli.EXIT_CHECK
    assert "node 5" in err and "[0.75, 0.25, 0.75]" in err


# ---------------------------------------------------------------------------
# verify and output files


def test_verify_quadrature(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "quadrature")
    assert code == 0 and "[FAIL]" not in out and out.count("[PASS]") > 10


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(harness, "run_suite", lambda *a: [harness.VerificationReport("broken", False, 1.0, 0.0)])
    code, out, _ = run(capsys, "verify", "--suite", "bounds")
    assert code == cli.EXIT_CHECK and "[FAIL] broken" in out


def test_verify_deterministic_across_threads(capsys, tmp_path):
    paths = []
    for threads in ("1", "8", "1"):
        path = tmp_path / f"report-{len(paths)}.json"
        code, _, _ = run(capsys, "verify", "--suite", "adversary", "--seed", "7", "--threads", threads,
                         "--format", "json", "--output", str(path))
        assert code == 0
        paths.append(path)
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]
    doc = json.loads(blobs[0])
    assert doc["schema_version"] == 1 and doc["passed"] is True
    assert "threads" not in blobs[0].decode()


def test_atomic_output_replaces_file(capsys, tmp_path):
    path = tmp_path / "out.csv"
    path.write_text("stale\n")
    code, _, _ = run(capsys, "bounds", "--eps", "0.1", "--d", "2", "--r", "1", "--output", str(path))
    assert code == 0
    assert path.read_text().startswith("epsilon,")
    assert sorted(os.listdir(tmp_path)) == ["out.csv"]


def test_write_atomic_cleans_up_on_error(tmp_path, monkeypatch):
    def boom(*a):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        cli.write_atomic(str(tmp_path / "x.txt"), "data")
    assert os.listdir(tmp_path) == []


def test_output_to_missing_directory(capsys, tmp_path):
    code, _, err = run(capsys, "bounds", "--eps", "0.1", "--d", "2", "--r", "1",
                       "--output", str(tmp_path / "nope" / "x.csv"))
    assert code == cli.EXIT_USAGE and err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cubecert", "plan", "--eps", "1.5", "--d", "2", "--r", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "epsilon must lie in (0,1)" in proc.stderr
