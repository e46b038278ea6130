"""Command-line interface: config handling, reports, determinism."""

from __future__ import annotations

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from wy_stability.cli import (
    ConfigError,
    RunConfig,
    load_config_file,
    load_witness,
    main,
    parse_args,
    run,
)
from wy_stability.functional import eval_F
from wy_stability.gform import Direction, RicciEigs
from wy_stability.harmonics import build_basis
from wy_stability.models import h_family, negative_direction
from wy_stability.quad import build_grid

SCHEMA = json.loads(
    resources.files("wy_stability").joinpath("report_schema.json").read_text()
)


def read_report(path) -> dict:
    report = json.loads(path.read_text())
    jsonschema.validate(report, SCHEMA)
    return report


def test_parse_args_defaults():
    config = parse_args(["gform"])
    assert config.command == "gform"
    assert config.n_theta == 32 and config.n_phi == 64
    assert config.ltrunc == 8
    assert config.format == "json"
    assert config.timings is False


def test_parse_args_grid_and_overrides():
    config = parse_args(["scan", "--grid", "16x32", "--ltrunc", "5", "--seed", "9"])
    assert (config.n_theta, config.n_phi) == (16, 32)
    assert config.ltrunc == 5
    assert config.seed == 9
    config = parse_args(["gform", "--set", "lam=1,-1,0", "--set", "bbar=0.02"])
    assert config.lam == (1.0, -1.0, 0.0)
    assert config.bbar == 0.02


def test_parse_args_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_args(["gform", "--grid", "16by32"])
    with pytest.raises(ConfigError):
        parse_args(["gform", "--set", "unknown_key=1"])
    with pytest.raises(ConfigError):
        parse_args(["gform", "--set", "command=scan"])


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        "lam = 1, -1, 0\n"
        "bbar = 0.005\n"
        "ltrunc = 6\n"
        "timings = true\n"
    )
    loaded = load_config_file(str(cfg))
    assert loaded["lam"] == (1.0, -1.0, 0.0)
    assert loaded["bbar"] == 0.005
    assert loaded["ltrunc"] == 6
    assert loaded["timings"] is True
    config = parse_args(["gform", "--config", str(cfg), "--set", "bbar=0.01"])
    assert config.bbar == 0.01  # --set wins over the file
    assert config.ltrunc == 6


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 3\n")
    with pytest.raises(ConfigError):
        load_config_file(str(bad))
    bad.write_text("just a line without equals\n")
    with pytest.raises(ConfigError):
        load_config_file(str(bad))
    bad.write_text("timings = maybe\n")
    with pytest.raises(ConfigError):
        load_config_file(str(bad))
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "missing.cfg"))


def test_exit_codes(tmp_path):
    out = tmp_path / "r.json"
    assert main(["integrals", "--out", str(out)]) == 0
    # a coarse grid cannot integrate degree 10 and the verdict flips
    assert main(["integrals", "--grid", "4x8", "--out", str(out)]) == 1
    assert main(["integrals", "--grid", "nope"]) == 2
    assert main(["gform", "--set", "bogus=1"]) == 2
    assert main(["certify", "--set", "eps=3.0"]) == 2


def test_report_shape_and_schema(tmp_path):
    out = tmp_path / "report.json"
    assert main(["gform", "--grid", "24x48", "--ltrunc", "6", "--out", str(out)]) == 0
    report = read_report(out)
    assert report["schema_version"] == 1
    assert report["command"] == "gform"
    assert report["verdict"] == "PASS"
    assert report["timings"] is None
    assert report["config"]["n_theta"] == 24
    assert "out" not in report["config"]
    assert len(report["results"]) == len(report["config"]["bbar_list"])
    for row in report["results"]:
        assert row["pass"] is True
        assert row["classification"] in ("POSITIVE", "INDEFINITE", "BORDERLINE")


def test_reports_are_byte_deterministic(tmp_path):
    args = ["scan", "--grid", "24x48", "--ltrunc", "5", "--set", "r_list=0.1,0.01"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_timings_only_when_requested(tmp_path):
    out = tmp_path / "t.json"
    assert main(["small-sphere", "--set", "curv_r=2", "--timings", "--out", str(out)]) == 0
    report = read_report(out)
    assert report["timings"] is not None
    assert report["timings"]["total_s"] >= 0.0


def test_csv_export(tmp_path):
    out = tmp_path / "rows.csv"
    assert main(["small-sphere", "--format", "csv", "--set", "curv_r=2", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "r,mass_expansion"
    assert len(lines) == 1 + 3  # default r_list has three entries


def test_scan_report_contents(tmp_path):
    out = tmp_path / "scan.json"
    assert main(["scan", "--ltrunc", "6", "--out", str(out)]) == 0
    report = read_report(out)
    bis = report["summary"]["bisection"]
    assert bis["contains_threshold"] is True
    assert bis["width"] < 1.0 / 450.0
    assert bis["bracket_lo"] < 1.0 / 90.0 < bis["bracket_hi"]
    for row in report["results"]:
        if row["skipped"]:
            assert "notice" in row
            continue
        if row["bbar"] < 1.0 / 30.0:
            assert row["deficit_closed"] > 0.0
        assert abs(row["deficit_closed"] - row["deficit_quadrature"]) < 1e-10


def test_counterexample_witness_roundtrip(tmp_path):
    out = tmp_path / "ce.json"
    wit = tmp_path / "wit.json"
    rc = main(
        [
            "counterexample",
            "--ltrunc",
            "6",
            "--out",
            str(out),
            "--set",
            "witness=" + str(wit),
        ]
    )
    assert rc == 0
    report = read_report(out)
    assert report["summary"]["witness_file"] == str(wit)
    row = report["results"][0]
    assert row["F_value"] < 0.0
    assert row["guaranteed"] is True
    assert row["relative_deviation"] < 1e-3

    # the witness file reproduces the in-process direction to roundoff
    grid = build_grid(32, 64)
    basis = build_basis(grid, 6)
    eigs = RicciEigs(np.array(report["config"]["lam"]))
    direction = Direction(np.array(report["config"]["a"]))
    nd = negative_direction(
        basis, eigs, report["config"]["bbar"], report["config"]["r"], direction
    )
    loaded = load_witness(str(wit))
    assert loaded.L == 6
    assert np.max(np.abs(loaded.c - nd.eta.c)) < 1e-12

    # reloaded coefficients still certify negativity
    H = h_family(eigs, report["config"]["bbar"], report["config"]["r"], grid)
    assert eval_F(basis, H, loaded) < 0.0


def test_counterexample_fails_below_threshold(tmp_path):
    out = tmp_path / "ce0.json"
    rc = main(
        ["counterexample", "--ltrunc", "6", "--set", "bbar=0.0", "--out", str(out)]
    )
    assert rc == 1
    report = read_report(out)
    assert report["verdict"] == "FAIL"
    assert report["results"][0]["guaranteed"] is False


def test_small_sphere_degenerate_is_data_not_failure(tmp_path):
    out = tmp_path / "deg.json"
    rc = main(
        [
            "small-sphere",
            "--set", "curv_r=0",
            "--set", "ric_sq=0",
            "--set", "lap_r=0",
            "--out", str(out),
        ]
    )
    assert rc == 0
    report = read_report(out)
    assert report["summary"]["case"] == "DEGENERATE"
    assert report["summary"]["classification"] is None
    assert "note" in report["summary"]
    assert all(row["mass_expansion"] == 0.0 for row in report["results"])


def test_certify_const_family(tmp_path):
    out = tmp_path / "cert.json"
    assert main(["certify", "--ltrunc", "6", "--out", str(out)]) == 0
    report = read_report(out)
    row = report["results"][0]
    assert row["conditions_pass"] is True
    assert row["min_eig_unrestricted"] > 0.0
    assert report["summary"]["certificate_sound"] is True


def test_certify_round_reference_has_no_deficit(tmp_path):
    out = tmp_path / "cert0.json"
    assert main(["certify", "--ltrunc", "6", "--set", "eps=0", "--out", str(out)]) == 0
    report = read_report(out)
    row = report["results"][0]
    assert row["cond_a"] is False
    assert row["conditions_pass"] is False
    # no certificate claim is made, so soundness holds vacuously
    assert report["summary"]["certificate_sound"] is True


def test_certify_conditions_refuse_indefinite_family(tmp_path):
    # above the threshold at a visible radius the ratio condition fails,
    # and the unrestricted pencil minimum is indeed negative while the
    # degree >= 2 restriction stays safely positive
    out = tmp_path / "cert60.json"
    rc = main(
        [
            "certify",
            "--set", "family=quartic",
            "--set", "bbar=0.016666666666666666",
            "--set", "r=0.2",
            "--out", str(out),
        ]
    )
    assert rc == 0
    report = read_report(out)
    row = report["results"][0]
    assert row["cond_a"] is True and row["cond_b1"] is True
    assert row["cond_b2"] is False
    assert row["min_eig_unrestricted"] < 0.0
    assert row["min_eig_restricted"] > 0.3
    assert report["summary"]["certificate_sound"] is True


def test_run_unknown_command():
    with pytest.raises(ConfigError):
        run(RunConfig(command="nonsense"))


def test_stdout_output_parses(capsys):
    rc = main(["small-sphere", "--set", "curv_r=2"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    jsonschema.validate(report, SCHEMA)
    assert report["command"] == "small-sphere"
