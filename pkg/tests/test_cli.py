import json
import subprocess
import sys

import pytest

from stabneg.cli import main, parse_config, parse_grid
from stabneg.errors import ConfigError


def write(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


SCAN = {
    "model": {"type": "toric2d_boundary", "L": 3},
    "grid": {"beta_lambda_a": {"start": 0.1, "stop": 2, "num": 3}, "beta_lambda_b": [1.0, "inf", 0.5]},
}


def test_verify_torus_exit_zero(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_torus", "L": 2, "beta_lambda_a": 1, "beta_lambda_b": 1}})
    out = tmp_path / "v.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] and doc["records"][0]["deviations"]["negativity_spectrum"] < 1e-10


def test_verify_mismatch_exit_three(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_torus", "L": 2, "beta_lambda_a": 1, "beta_lambda_b": 1},
                           "verify_tolerance": 1e-300})
    out = tmp_path / "v.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 3
    assert json.loads(out.read_text())["passed"] is False


def test_malformed_json_exit_one_no_output(tmp_path):
    cfg = write(tmp_path, "{not json")
    out = tmp_path / "o.csv"
    assert main(["scan", "--config", cfg, "--out", str(out)]) == 1
    assert not out.exists()


@pytest.mark.parametrize(
    "doc",
    [
        {"model": {"type": "toric2d_boundary", "L": 3}},
        {"model": {"type": "toric2d_boundary", "L": 3}, "grid": {"beta_lambda_a": [], "beta_lambda_b": [1]}},
        {"model": {"type": "nope", "L": 3}, "grid": SCAN["grid"]},
        {"model": {"type": "toric2d_boundary"}, "grid": SCAN["grid"]},
        {"model": {"type": "toric2d_boundary", "L": 3}, "grid": {"beta_lambda_a": ["hot"], "beta_lambda_b": [1]}},
        {"model": {"type": "custom"}, "grid": SCAN["grid"]},
    ],
    ids=["no-grid", "empty-grid", "bad-type", "no-L", "bad-value", "custom-empty"],
)
def test_invalid_configs_exit_one(tmp_path, doc):
    out = tmp_path / "o.csv"
    assert main(["scan", "--config", write(tmp_path, doc), "--out", str(out)]) == 1
    assert not out.exists()


def test_single_point_requires_couplings(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_boundary", "L": 3, "beta_lambda_a": 1}})
    assert main(["negativity", "--config", cfg]) == 1


def test_model_errors_exit_two(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_boundary", "L": 1}, "grid": SCAN["grid"]})
    assert main(["scan", "--config", cfg]) == 2
    cfg = write(tmp_path, {"model": {"type": "toric4d_boundary", "L": 2}, "grid": SCAN["grid"]})
    assert main(["scan", "--config", cfg]) == 2
    dep = {"n_qubits": 2, "region_a": [0], "generators": [{"x": [0, 1]}, {"x": [0, 1]}], "couplings": [1, 1]}
    cfg = write(tmp_path, {"model": {"type": "custom", "stabilizers": dep}})
    assert main(["spectrum", "--config", cfg]) == 2
    cfg = write(tmp_path, {"model": {"type": "toric2d_boundary", "L": 8, "beta_lambda_a": 1, "beta_lambda_b": 1}})
    assert main(["verify", "--config", cfg]) == 2


def test_scan_deterministic_and_ordered(tmp_path):
    cfg = write(tmp_path, SCAN)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["scan", "--config", cfg, "--out", str(a), "--format", "csv"]) == 0
    assert main(["scan", "--config", cfg, "--out", str(b), "--format", "csv", "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].startswith("# stabneg scan schema=1")
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 9
    keys = [(float(r[0]), float(r[1])) for r in rows]
    assert keys == sorted(keys)
    assert rows[2][1] == "inf" and rows[2][3] == "1"


def test_scan_json_records(tmp_path):
    out = tmp_path / "s.json"
    assert main(["scan", "--config", write(tmp_path, SCAN), "--out", str(out), "--log-base", "e"]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1 and doc["log_base"] == "e" and len(doc["records"]) == 9
    rec = doc["records"][0]
    assert set(rec) >= {"e_n", "b_min", "z_rho", "log_z", "cost_equals_negativity"}
    assert "wall_time_s" not in rec


def test_scan_timing_flag(tmp_path):
    out = tmp_path / "s.json"
    assert main(["scan", "--config", write(tmp_path, SCAN), "--out", str(out), "--timing"]) == 0
    assert all("wall_time_s" in r for r in json.loads(out.read_text())["records"])


def test_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("STABNEG_THREADS", "2")
    out = tmp_path / "s.json"
    assert main(["scan", "--config", write(tmp_path, SCAN), "--out", str(out)]) == 0
    monkeypatch.setenv("STABNEG_THREADS", "zero")
    assert main(["scan", "--config", write(tmp_path, SCAN), "--out", str(out)]) == 1
    assert main(["scan", "--config", write(tmp_path, SCAN), "--out", str(out), "--threads", "1"]) == 0


def test_spectrum_and_binegativity_tables(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_boundary", "L": 2, "beta_lambda_a": "inf", "beta_lambda_b": 0.5}})
    out = tmp_path / "f.csv"
    assert main(["spectrum", "--config", cfg, "--out", str(out), "--format", "csv"]) == 0
    lines = out.read_text().splitlines()
    assert "kind=negativity" in lines[0] and len(lines) == 2 + 16
    out2 = tmp_path / "b.json"
    assert main(["binegativity", "--config", cfg, "--out", str(out2)]) == 0
    doc = json.loads(out2.read_text())
    assert doc["kind"] == "binegativity" and len(doc["values"]) == 16


def test_negativity_custom_bell(tmp_path):
    bell = {"n_qubits": 2, "region_a": [0], "generators": [{"x": [0, 1]}, {"z": [0, 1]}], "couplings": ["inf", "inf"]}
    (tmp_path / "bell.json").write_text(json.dumps(bell))
    cfg = write(tmp_path, {"model": {"type": "custom", "path": "bell.json"}})
    out = tmp_path / "n.json"
    assert main(["negativity", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["e_n"] == 1.0 and rep["lambda_min"] == 0.5 and rep["cost_equals_negativity"]


def test_custom_with_grid_uses_css_couplings(tmp_path):
    bell = {"n_qubits": 2, "region_a": [0], "generators": [{"x": [0, 1]}, {"z": [0, 1]}]}
    cfg = write(tmp_path, {"model": {"type": "custom", "stabilizers": bell},
                           "grid": {"beta_lambda_a": [1.0], "beta_lambda_b": ["inf"]}})
    out = tmp_path / "s.json"
    assert main(["scan", "--config", cfg, "--out", str(out)]) == 0
    rec = json.loads(out.read_text())["records"][0]
    assert rec["t_b"] == 1.0 and rec["beta_lambda_b"] == "inf"


def test_bench(tmp_path):
    out = tmp_path / "bench.json"
    assert main(["bench", "--config", write(tmp_path, {"bench": {"k": 2}}), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["max_abs_deviation"] <= 1e-12
    assert doc["naive_seconds"] < 1e-3 and doc["fwht_seconds"] < 1e-3
    assert main(["bench", "--config", write(tmp_path, {"bench": {"k": 12, "seed": 3}}), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["max_relative_deviation"] <= 1e-9
    assert main(["bench", "--config", write(tmp_path, {"bench": {"k": 21}})]) == 1


def test_parse_grid_extra_points():
    pts = parse_grid({"extra_points": [["inf", 1], [0.5, 0.5]]})
    assert pts == [(0.5, 0.5), (float("inf"), 1.0)]
    with pytest.raises(ConfigError):
        parse_grid({"beta_lambda_a": [1]})


def test_task_mismatch():
    with pytest.raises(ConfigError):
        parse_config({"task": "verify", "model": {"type": "toric2d_torus", "L": 2}}, "scan")


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, {"model": {"type": "toric2d_torus", "L": 2, "beta_lambda_a": 1, "beta_lambda_b": 1}})
    proc = subprocess.run([sys.executable, "-m", "stabneg", "negativity", "--config", cfg], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["log_base"] == "2"
