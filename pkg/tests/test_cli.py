import csv
import json
import subprocess
import sys

import pytest

from modalqm.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, OUT_ENV, ConfigError, main, parse_config
from modalqm.scenarios import REGISTRY


def run_cli(*argv):
    return main(list(argv))


def test_run_epr_aligned(tmp_path, capsys):
    out = tmp_path / "epr.json"
    assert run_cli("run", "--scenario", "epr_bohm", "--out", str(out)) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["passed"] is True
    assert rep["outputs"]["correlation_singlet"] == pytest.approx(-1.0, abs=1e-12)
    assert all(c["passed"] for c in rep["checks"])
    assert all("tolerance" in c for c in rep["checks"])
    assert "PASS epr_bohm.correlation_singlet" in capsys.readouterr().out


def test_unknown_scenario_is_usage_error(tmp_path):
    out = tmp_path / "x.json"
    assert run_cli("run", "--scenario", "nope", "--out", str(out)) == EXIT_USAGE
    assert not out.exists()


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run_cli("run", "--config", str(cfg), "--out", str(tmp_path / "r.json")) == EXIT_USAGE
    cfg.write_text(json.dumps({"name": "pbr", "parameters": {"bogus": 1}}))
    assert run_cli("run", "--config", str(cfg), "--out", str(tmp_path / "r.json")) == EXIT_USAGE
    assert run_cli("run") == EXIT_USAGE
    assert run_cli("frobnicate") == EXIT_USAGE


def test_check_failure_still_writes_report(tmp_path):
    cfg = tmp_path / "c.json"
    # an impossible override makes a pass/fail check fail
    cfg.write_text(json.dumps({"name": "myrvold", "tolerances": {"spectrum_alpha": -1.0}}))
    out = tmp_path / "m.json"
    assert run_cli("run", "--config", str(cfg), "--out", str(out)) == EXIT_CHECK
    assert json.loads(out.read_text())["passed"] is False


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run_cli("run", "--scenario", "quantum_zeno", "--seed", "5", "--out", str(p)) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    ca, cb = tmp_path / "a_zeno_survival.csv", tmp_path / "b_zeno_survival.csv"
    assert ca.read_bytes() == cb.read_bytes()


def test_curve_csv_format(tmp_path):
    out = tmp_path / "bell.json"
    assert run_cli("run", "--scenario", "bell_check", "--out", str(out)) == EXIT_OK
    raw = (tmp_path / "bell_bell_angle_scan.csv").read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode("utf-8").splitlines()))
    assert all("[" in h and h.endswith("]") for h in rows[0])
    assert len(rows) == 92
    float(rows[1][0])


def test_csv_checks_format(tmp_path):
    out = tmp_path / "pbr.csv"
    assert run_cli("run", "--scenario", "pbr", "--format", "csv", "--out", str(out)) == EXIT_OK
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["check", "value", "tolerance", "relation", "passed"]
    assert all(r[-1] == "true" for r in rows[1:])


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert run_cli("run", "--scenario", "ghz_mermin") == EXIT_OK
    assert (tmp_path / "ghz_mermin.json").exists()


def test_config_file_parameters(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "von_neumann_measurement", "seed": 3,
                               "parameters": {"alpha": [[0.5477225575051661, 0], [0.8366600265340756, 0]],
                                              "env_qubits": 6}}))
    out = tmp_path / "vn.json"
    assert run_cli("run", "--config", str(cfg), "--out", str(out)) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["outputs"]["pointer_probabilities"] == pytest.approx([0.3, 0.7], abs=1e-12)


def test_parse_config_validation():
    with pytest.raises(ConfigError):
        parse_config([])
    with pytest.raises(ConfigError):
        parse_config({"name": "pbr", "extra": 1})
    with pytest.raises(ConfigError):
        parse_config({"name": "pbr", "seed": "x"})
    with pytest.raises(ConfigError):
        parse_config({})
    cfg = parse_config({"scenario": "pbr", "tolerances": {"orthonormal": 1e-9}})
    assert cfg.name == "pbr" and cfg.seed == 0


def test_list_json_roundtrips_through_parser(capsys):
    assert run_cli("list", "--format", "json") == EXIT_OK
    entries = json.loads(capsys.readouterr().out)
    assert [e["name"] for e in entries] == list(REGISTRY)
    assert len(entries) == 9
    for e in entries:
        assert "required" in e
        cfg = parse_config(e)
        assert cfg.name == e["name"]


def test_list_text(capsys):
    assert run_cli("list") == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 9 and lines[0].startswith("von_neumann_measurement")


def test_verify_small(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert run_cli("verify", "--suite", "partial_trace", "--trials", "5", "--out", str(out)) == EXIT_OK
    summary = json.loads(out.read_text())
    assert summary["ok"] and summary["trials"] == 5
    assert "PASS partial_trace.diagram_commutation" in capsys.readouterr().out


def test_verify_rejects_zero_trials():
    assert run_cli("verify", "--trials", "0") == EXIT_USAGE


def test_tolerance_scale_must_be_positive():
    assert run_cli("run", "--scenario", "pbr", "--tolerance-scale", "0") == EXIT_USAGE


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "modalqm", "list"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "pbr" in res.stdout
