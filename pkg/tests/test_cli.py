import csv
import json
import os

import pytest
from click.testing import CliRunner

from fermipole.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_identity_check_exits_zero(runner):
    result = runner.invoke(main, ["identity-check"])
    assert result.exit_code == 0, result.output
    assert "max residual" in result.output
    assert "[ok]" in result.output


def test_figure_writes_json(runner, tmp_path):
    out = str(tmp_path / "figs")
    result = runner.invoke(main, ["figure", "dumbbell", "--out", out, "--set", "q=10"])
    assert result.exit_code == 0, result.output
    with open(os.path.join(out, "figure_dumbbell.json")) as fh:
        doc = json.load(fh)
    assert len(doc["poles"]) == 20
    assert doc["params"]["q"] == 10.0


def test_table1_writes_csv_and_report(runner, tmp_path):
    out = str(tmp_path / "t1")
    result = runner.invoke(main, ["table1", "--size", "8", "--out", out])
    assert result.exit_code == 0, result.output
    with open(os.path.join(out, "table1.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 7
    assert all(float(r["delta_rho_rel"]) <= 1e-6 for r in rows)
    with open(os.path.join(out, "report.json")) as fh:
        report = json.load(fh)
    assert report["table1"]["all_rows_passed"] is True
    assert "reference_comparison" in report["table1"]


def test_sign_command(runner, tmp_path):
    out = str(tmp_path / "sign")
    result = runner.invoke(main, ["sign", "--size", "8", "--out", out])
    assert result.exit_code == 0, result.output
    with open(os.path.join(out, "sign_convergence.json")) as fh:
        doc = json.load(fh)
    assert doc["fit"]["r_squared"] >= 0.97


def test_config_file_overrides_flags(runner, tmp_path):
    out_flag = str(tmp_path / "flag")
    out_cfg = str(tmp_path / "cfg")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\nout = {out_cfg}\nsize = 8\n")
    result = runner.invoke(
        main, ["identity-check", "--out", out_flag, "--config", str(cfg)]
    )
    assert result.exit_code == 0, result.output


def test_env_var_out_dir(runner, tmp_path, monkeypatch):
    target = str(tmp_path / "env-out")
    monkeypatch.setenv("FERMIPOLE_OUT", target)
    result = runner.invoke(main, ["figure", "sign-loop"])
    assert result.exit_code == 0, result.output
    assert os.path.exists(os.path.join(target, "figure_sign-loop.json"))
