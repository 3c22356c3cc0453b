import csv
import json

import pytest

from qbsim.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ratio_sweep_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["ratio-sweep", "--out", str(out), "--set", "numerics.samples=5"], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["beta", "mean_photons", "ratio_dephased", "ratio_coherent"]
    assert len(rows) == 6
    manifest = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert manifest["scenario"] == "ratio-sweep"
    assert manifest["resolved_parameters"]["lambda_ab_rad_s"] == 1e5
    assert manifest["output"]["rows"] == 5


def test_json_output(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["ratio-sweep", "--out", str(out), "--format", "json", "--set", "numerics.samples=3"], capsys)[0] == 0
    records = json.loads(out.read_text())
    assert len(records) == 3 and set(records[0]) == {"beta", "mean_photons", "ratio_dephased", "ratio_coherent"}


def test_manifest_rerun_is_identical(tmp_path, capsys):
    a = tmp_path / "a.csv"
    assert run(["squid-levels", "--out", str(a), "--set", "numerics.grid_size=2048"], capsys)[0] == 0
    b = tmp_path / "b.csv"
    assert run(["run", str(tmp_path / "a.csv.manifest.json"), "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_reports_dispersive_warning(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "readout", "parameters": {"g_a": "400 MHz angular"}}))
    code, out, _ = run(["validate", str(cfg)], capsys)
    report = json.loads(out)
    assert code == 0 and report["ok"]
    assert any("g_a/|Delta_a|" in w for w in report["warnings"])


def test_invalid_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "charge", "parameters": {"gamma": "0.01 MHz"}}))
    code, _, err = run(["charge", str(cfg)], capsys)
    assert code == 2 and "angular" in err
    code, out, _ = run(["validate", str(cfg)], capsys)
    assert code == 2 and not json.loads(out)["ok"]


def test_scenario_mismatch_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "age"}))
    assert run(["charge", str(cfg)], capsys)[0] == 2


def test_runtime_violation_exit_3(tmp_path, capsys):
    code, _, err = run(
        ["squid-levels", "--out", str(tmp_path / "x.csv"), "--set", "parameters.phi_d=\"1.749999 Phi0\"",
         "--set", "numerics.grid_size=2048"],
        capsys,
    )
    assert code == 3 and "barrier" in err


def test_defaults_command(capsys):
    code, out, _ = run(["defaults", "charge"], capsys)
    assert code == 0 and json.loads(out)["scenario"] == "charge"


def test_unknown_figure_rejected():
    with pytest.raises(SystemExit):
        main(["reproduce", "fig9"])


def test_charge_and_age_scenarios_small(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = run(
        ["charge", "--out", str(out), "--set", "parameters.beta_mag=0.05", "--set", "numerics.dim=16",
         "--set", "numerics.rows=11"],
        capsys,
    )
    assert code == 0
    m = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    assert m["summary"]["max_relative_error_vs_analytic"] < 1e-4
    out = tmp_path / "a.csv"
    code, _, _ = run(
        ["age", "--out", str(out), "--set", "parameters.n_max=4", "--set", "parameters.gamma_tau_end=3",
         "--set", "numerics.rows=5"],
        capsys,
    )
    assert code == 0
    m = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert m["summary"]["max_abs_error_vs_analytic"] < 1e-6


def test_small_dim_warning_in_manifest(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, stdout, _ = run(
        ["ergotropy", "--out", str(out), "--set", "numerics.dim=16", "--set", "numerics.samples=3"], capsys
    )
    assert code == 0
    assert "numerics.dim=16 is small" in stdout
