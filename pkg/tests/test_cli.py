"""Configuration parsing and command-line artifact generation."""

import json

import numpy as np
import pytest

from abelops.cli import main
from abelops.config import ConfigError, parse_config


def test_defaults():
    cfg = parse_config()
    assert cfg.branch == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert cfg.seed == 42
    assert cfg.regime == "all"
    assert np.allclose(cfg.c, [0.13j, 0.29j])


def test_file_and_flag_merge(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('branch = [0, 1, 2, 3, 5]\nseed = 7\ngrid = 6\n')
    cfg = parse_config(str(p), {"seed": 11, "grid": None})
    assert cfg.branch == [0, 1, 2, 3, 5]
    assert cfg.seed == 11  # flag wins
    assert cfg.grid == 6  # unset flag does not clobber the file


def test_unknown_key_lists_valid_names(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("speling = 1\n")
    with pytest.raises(ConfigError, match="valid keys"):
        parse_config(str(p))


def test_unknown_tolerance_rejected(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("[tolerances]\nnot_a_check = 0.1\n")
    with pytest.raises(ConfigError, match="unknown tolerance"):
        parse_config(str(p))


def test_bad_branch_rejected():
    with pytest.raises(Exception):
        parse_config(None, {"branch": [4, 3, 2, 1, 0]})


def test_tolerance_scaling():
    cfg = parse_config(None, {"tol_scale": 2.0})
    eff = cfg.effective_tolerances()
    assert eff["commutator"] == pytest.approx(2e-6)


def test_cli_bad_curve_exits_2(capsys):
    rc = main(["--curve", "3", "2", "1", "0", "-1", "periods"])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_periods_artifact(tmp_path):
    rc = main(["--out", str(tmp_path), "periods"])
    assert rc == 0
    doc = json.loads((tmp_path / "Omega.json").read_text())
    assert "Omega" in doc and len(doc["config_hash"]) == 16
    Om = np.array([[complex(*c) for c in row] for row in doc["Omega"]])
    assert np.max(np.abs(Om - Om.T)) < 1e-9


def test_cli_constants_artifact(tmp_path):
    rc = main(["--out", str(tmp_path), "constants"])
    assert rc == 0
    doc = json.loads((tmp_path / "constants.json").read_text())
    assert doc["b"][0] == pytest.approx(-0.5, abs=1e-10)


def test_cli_scan_artifacts(tmp_path):
    rc = main(["--out", str(tmp_path), "--grid", "5", "scan"])
    assert rc == 0
    for idx in (1, 2, 3, 4):
        csv_path = tmp_path / "scan" / f"torus_{idx}.csv"
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("# slice=torus_")
        assert lines[1] == "t1,t2,re,im"
        assert len(lines) == 2 + 25
        assert (tmp_path / "scan" / f"torus_{idx}.png").stat().st_size > 0


def test_cli_verify_small_pass(tmp_path):
    rc = main(["--out", str(tmp_path), "--grid", "3", "verify",
               "--regime", "theorem2"])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["overall"] is True
    assert report["n_checks"] == report["n_passed"] >= 6
    assert all(c["name"].startswith("theorem2_") for c in report["checks"])
    assert (tmp_path / "report_residuals.png").stat().st_size > 0


def test_cli_verify_failure_exit_code(tmp_path):
    cfgfile = tmp_path / "strict.toml"
    cfgfile.write_text("[tolerances]\nreality = 1e-300\n")
    rc = main(["--config", str(cfgfile), "--out", str(tmp_path), "--grid", "3",
               "verify", "--regime", "theorem2"])
    assert rc == 1
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["overall"] is False
    assert "theorem2_reality" in report["failed"]
