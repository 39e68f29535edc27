import json
import math
import os

import pytest

from opentorus.cli import main
from opentorus.config import (ConfigError, ExperimentConfig, load_config,
                              parse_config, serialize_config)


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_config_empty_file_gives_defaults():
    assert parse_config("") == ExperimentConfig()
    assert parse_config("# only a comment\n\n") == ExperimentConfig()


def test_config_roundtrip_is_lossless():
    cfg = parse_config(
        "matrix = 3 1 0 0; 2 1 0 0; 0 0 2 1; 0 0 1 1\n"
        "hole_center = 0.1 0.2 0.3 0.4\n"
        "hole_radius = 0.07\n"
        "radius_list = 0.05 0.06070000000000001 0.07 0.08\n"
        "base_point = 0.123456789012345 0.5 0.25 0.75\n"
        "t = 5\nk = 3\ndelta = 1.52587890625e-05\n"
        "lambda_prime = 1.17\np = 2.0\nell = 2\nk_em = 2\n"
        "seed = 42\nout_dir = results\nworkers = 3\n")
    assert parse_config(serialize_config(cfg)) == cfg


def test_config_rejects_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError, match="radius"):
        parse_config("radius = 0.1\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("t = 3\nt = 4\n")
    with pytest.raises(ConfigError, match="key=value"):
        parse_config("just some words\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config("t = three\n")


def test_config_radius_error_names_field_and_bound():
    with pytest.raises(ConfigError) as err:
        parse_config("hole_radius = 0.6\n")
    assert err.value.field_name == "hole_radius"
    assert "r0 = 0.25" in str(err.value)
    with pytest.raises(ConfigError, match="radius_list"):
        parse_config("radius_list = 0.1 0.2 0.3 0.4\n")


def test_config_validates_shapes_and_modes():
    with pytest.raises(ConfigError, match="mode"):
        parse_config("mode = mixed\n")
    with pytest.raises(ConfigError, match="q"):
        parse_config("mode = exact\n")
    with pytest.raises(ConfigError, match="base_point"):
        parse_config("base_point = 0.5\n")
    with pytest.raises(ConfigError, match="matrix"):
        parse_config("matrix = 1 0; 0 1\n")
    with pytest.raises(ConfigError, match="workers"):
        parse_config("workers = 0\n")


def test_cli_calibrate_defaults(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["calibrate", "--out", out]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert all(line.startswith("PASS calibration-") for line in lines)
    doc = json.loads((tmp_path / "out" / "calibrate.json").read_text())
    assert doc["report"] == "calibrate"
    assert doc["version"]
    assert doc["config"]["out_dir"] == out
    assert [row["passed"] for row in doc["rows"]] == [True, True]


def test_cli_config_error_exit1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "hole_radius = 0.6\n")
    assert main(["mixing-fit", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "hole_radius" in capsys.readouterr().err


def test_cli_dim_sweep_needs_four_radii(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "radius_list = 0.2\n")
    assert main(["dim-sweep", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "radius_list" in capsys.readouterr().err


def test_cli_dim_sweep_deterministic_csv(tmp_path):
    cfg = write_cfg(tmp_path, "radius_list = 0.18 0.19 0.2 0.21\n")
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["dim-sweep", "--config", cfg, "--out", out1]) == 0
    assert main(["dim-sweep", "--config", cfg, "--out", out2,
                 "--workers", "2"]) == 0
    csv1 = (tmp_path / "a" / "dim_sweep.csv").read_bytes()
    csv2 = (tmp_path / "b" / "dim_sweep.csv").read_bytes()
    assert csv1 == csv2
    header = csv1.decode().splitlines()[0]
    assert header == "r,dim,deficit,theorem_ratio,conjecture_ratio"
    doc = json.loads((tmp_path / "a" / "dim_sweep.json").read_text())
    assert doc["d_double_prime"] > 0
    assert doc["c_conjecture"] > 0
    assert doc["protocol"]["lambda_prime"] == 1.2


def test_cli_cover_verify_grid(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "radius_list = 0.05 0.1 0.16 0.2\nk = 2\n")
    out = str(tmp_path / "out")
    assert main(["cover-verify", "--config", cfg, "--out", out]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    # 3 horizons x 2 admissible radii x 2 observation counts
    assert len(lines) == 12
    doc = json.loads((tmp_path / "out" / "cover_verify.json").read_text())
    assert doc["skipped_radii"] == [0.16, 0.2]
    assert all(row["ok"] for row in doc["rows"])


def test_cli_cover_verify_rejects_wide_radii(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "radius_list = 0.2 0.21 0.22 0.23\n")
    assert main(["cover-verify", "--config", cfg,
                 "--out", str(tmp_path)]) == 1
    assert "2r < r0" in capsys.readouterr().err


def test_cli_mollifier_scaling(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["mollifier-scaling", "--out", out]) == 0
    rows = (tmp_path / "out" / "mollifier_scaling.csv").read_text().splitlines()
    assert rows[0] == "d,ell,slope,bound_slope,slope_ok,monotone,passed"
    assert len(rows) == 5
    assert (tmp_path / "out" / "mollifier_scaling.svg").exists()


def test_cli_seed_recorded_in_outputs(tmp_path):
    cfg = write_cfg(tmp_path, "radius_list = 0.05 0.06 0.07 0.08\nk = 1\n")
    out = str(tmp_path / "out")
    assert main(["cover-verify", "--config", cfg, "--out", out,
                 "--seed", "7"]) == 0
    doc = json.loads((tmp_path / "out" / "cover_verify.json").read_text())
    assert doc["config"]["seed"] == 7


def test_cli_rejects_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_load_config_roundtrip_via_file(tmp_path):
    cfg = ExperimentConfig(hole_radius=0.11, seed=9,
                           base_point=(1 / 3, 2 / 7))
    path = write_cfg(tmp_path, serialize_config(cfg))
    assert load_config(path) == cfg
