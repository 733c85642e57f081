import csv
import io
import json

import pytest

from ethergeom import cli
from ethergeom.checks import CheckRecord, ConfigError, Report, RunConfig, run


def test_config_defaults_and_overrides():
    cfg = RunConfig()
    assert cfg.models == ("flat-r2", "sphere-s2", "hyperbolic-h2")
    new = cfg.with_overrides({"models": "sphere-s2", "seed": "3", "areas": "0.1, 0.05", "fd-step": "1e-6"})
    assert new.models == ("sphere-s2",)
    assert new.seed == 3 and new.areas == (0.1, 0.05) and new.fd_step == 1e-6
    assert cfg.seed == 0  # frozen original is untouched


def test_config_from_text():
    text = "# comment\nmodels = flat-r2\n\nsamples = 5   # trailing\nareas =\n"
    cfg = RunConfig.from_text(text)
    assert cfg.models == ("flat-r2",) and cfg.samples == 5 and cfg.areas == ()


@pytest.mark.parametrize("pairs", [{"bogus": "1"}, {"seed": "x"}, {"seed": "-1"}, {"rtol": "0"},
                                   {"areas": "0.1,-0.2"}, {"samples": "-3"}])
def test_config_rejects_bad_values(pairs):
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(pairs)


def test_config_rejects_malformed_line():
    with pytest.raises(ConfigError):
        RunConfig.from_text("models flat-r2")


def test_output_dir_not_part_of_report_config():
    assert "output" not in RunConfig().as_dict()


def test_record_comparisons():
    assert CheckRecord("a", "C1", "t", 1e-9, 1e-8).passed
    assert not CheckRecord("a", "C1", "t", float("nan"), 1e-8).passed
    assert CheckRecord("a", "C5", "t", 0.1, 1e-3, ">").passed
    assert CheckRecord("a", "C6", "t", 1.5, 1.5, ">=").passed
    assert CheckRecord("a", "C2", "t", 2.9, 3.0, "±", {"band": [2.7, 3.3]}).passed
    assert not CheckRecord("a", "C2", "t", 3.4, 3.0, "±", {"band": [2.7, 3.3]}).passed


def test_worst_orders_by_severity():
    recs = [CheckRecord("mild", "C1", "t", 2e-8, 1e-8), CheckRecord("bad", "C1", "t", 1.0, 1e-8),
            CheckRecord("ok", "C1", "t", 0.0, 1e-8)]
    assert [r.check_id for r in Report("check", {}, recs).worst()] == ["bad", "mild"]


def test_csv_columns():
    rep = Report("check", {}, [CheckRecord("C1.x", "C1", "tag", 1e-9, 1e-8)])
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["check_id", "eq_tag", "residual", "threshold", "pass"]
    assert rows[1][0] == "C1.x" and rows[1][-1] == "1"


def test_empty_model_list_gives_empty_report():
    rep = run("check", RunConfig(models=()))
    assert rep.records == [] and rep.passed


def test_unknown_subcommand_and_criterion():
    with pytest.raises(ConfigError):
        run("nope", RunConfig())
    with pytest.raises(ConfigError):
        run("check", RunConfig(), ["C42"])


def test_cli_flat_check_passes(tmp_path, capsys):
    code = cli.main(["check", "--model", "flat-r2", "--samples", "4", "--output", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "C1: PASS" in out and "C10: PASS" in out
    doc = json.loads((tmp_path / "check.json").read_text())
    assert doc["summary"]["failed"] == 0 and doc["subcommand"] == "check"
    assert (tmp_path / "check.csv").exists()


def test_cli_reports_are_byte_identical(tmp_path):
    args = ["check", "--model", "flat-r2", "--samples", "3", "--seed", "11", "--criterion", "C1"]
    assert cli.main(args + ["--output", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--output", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a/check.json").read_bytes() == (tmp_path / "b/check.json").read_bytes()
    assert cli.main(args[:-4] + ["--seed", "12", "--criterion", "C1", "--output", str(tmp_path / "c")]) == 0
    assert (tmp_path / "a/check.json").read_bytes() != (tmp_path / "c/check.json").read_bytes()


def test_cli_environment_output_dir_wins(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["check", "--model", "flat-r2", "--criterion", "C1", "--samples", "2",
                     "--output", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "env/check.json").exists()
    assert not (tmp_path / "flag").exists()


def test_cli_config_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("models = flat-r2\nsamples = 2\n")
    assert cli.main(["check", "--config", str(conf), "--criterion", "C1", "--no-write"]) == 0


@pytest.mark.parametrize("argv", [
    ["check", "--set", "bogus=1", "--no-write"],
    ["check", "--set", "noequals", "--no-write"],
    ["check", "--model", "klein-bottle", "--no-write"],
    ["check", "--seed", "-4", "--no-write"],
    ["check", "--config", "/nonexistent/run.conf", "--no-write"],
    ["frobnicate"],
])
def test_cli_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_cli_empty_model_list(tmp_path, capsys):
    assert cli.main(["check", "--model", "", "--output", str(tmp_path)]) == 0
    assert "0/0 checks passed" in capsys.readouterr().out


def test_cli_failure_exits_1(tmp_path, capsys, monkeypatch):
    from ethergeom import checks
    monkeypatch.setitem(checks.SUITES, "C6", lambda cfg: [
        CheckRecord("C6.fake", "C6", "tag", 1.0, 1e-3), CheckRecord("C6.fine", "C6", "tag", 0.0, 1e-3)])
    code = cli.main(["holonomy", "--model", "sphere-s2", "--areas", "0.02,0.01", "--output", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 1
    assert "C6: FAIL" in out and "C6.fake" in out and "1/2 checks passed" in out
    rows = list(csv.reader(open(tmp_path / "holonomy_sweep.csv")))
    assert rows[0] == ["model", "area", "delta", "slope"] and len(rows) == 3
