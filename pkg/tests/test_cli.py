"""Tests for run-config parsing, the runner and the command-line front end."""

import json
import logging
import math
import re

import numpy as np
import pandas as pd
import pytest

from interface.cli import run
from interface.run_config import build_run_config, merge, parse_run_file
from knowledge.channel_catalog import CATALOG, closed_form, describe
from pipeline import runner as runner_module
from pipeline.runner import EstimationRunner
from utils.errors import ConfigError, NumericError, UnknownChannelError

ERROR_LINE = re.compile(r"^error code=(\d) type=(\w+) message=.+$")


def error_lines(text):
    return [line for line in text.splitlines() if line.startswith("error ")]


class TestRunConfig:
    def test_parse_file(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text(
            "# comment line\ncommand = distance-curve\ntheta-start = 0.1  # trailing\ntheta_stop=0.9\n\npoints = 5\n",
            encoding="utf-8",
        )
        values = parse_run_file(path)
        assert values == {"command": "distance-curve", "theta_start": "0.1", "theta_stop": "0.9", "points": "5"}
        config = build_run_config(values)
        assert config.theta_start == 0.1 and config.points == 5
        assert config.output_format == "csv"

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("command = bound\ncommand = simulate\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            parse_run_file(path)

    def test_missing_separator(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("command bound\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            parse_run_file(path)

    def test_overrides_win(self):
        merged = merge({"command": "bound", "points": "5"}, {"points": "7", "channel": None})
        assert merged == {"command": "bound", "points": "7"}

    @pytest.mark.parametrize(
        "values",
        [
            {"channel": "dephasing"},
            {"command": "bound", "colour": "red"},
            {"command": "distance-curve", "points": "2"},
            {"command": "simulate", "format": "csv"},
            {"command": "simulate", "trials": "1"},
            {"command": "simulate", "seed": str(2 ** 64)},
            {"command": "bound", "theta_start": "0.5", "theta_stop": "0.2"},
            {"command": "bound", "points": "many"},
            {"command": "bound", "theta_start": "nan"},
            {"command": "bound", "extension": "cube"},
        ],
    )
    def test_rejects(self, values):
        with pytest.raises(ConfigError):
            build_run_config(values)

    def test_json_default_for_reports(self):
        assert build_run_config({"command": "simulate"}).output_format == "json"
        assert build_run_config({"command": "optimality-check"}).output_format == "json"

    def test_channel_params(self):
        config = build_run_config({"command": "bound", "channel": "damping", "n_max": "4"})
        assert config.channel_params() == {"n_max": 4}


class TestRunner:
    def test_grid_defaults_inside_finite_domain(self):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound"})
        grid = runner.grid(config, runner.family(config))
        assert grid[0] == pytest.approx(0.05) and grid[-1] == pytest.approx(0.95)
        assert grid.size == 19

    def test_unbounded_domain_needs_limits(self):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound", "channel": "dephasing"})
        with pytest.raises(ConfigError):
            runner.grid(config, runner.family(config))

    def test_grid_clamped_into_domain(self, caplog):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound", "theta_start": "0.0", "theta_stop": "1.0", "points": "5"})
        with caplog.at_level(logging.INFO, logger="qchanest"):
            grid = runner.grid(config, runner.family(config))
        assert grid.size == 5
        assert grid[0] == 1e-6
        assert grid[-1] == 1.0 - 1e-6
        assert "clamped" in caplog.text
        assert runner.metrics.grid.clamped_endpoints == 2

    def test_grid_inside_domain_is_untouched(self):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound", "theta_start": "0.2", "theta_stop": "0.6", "points": "3"})
        np.testing.assert_allclose(runner.grid(config, runner.family(config)), [0.2, 0.4, 0.6], rtol=1e-15)

    def test_grid_outside_domain(self):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound", "theta_start": "2.0", "theta_stop": "3.0"})
        with pytest.raises(ConfigError):
            runner.grid(config, runner.family(config))

    def test_default_povm(self):
        runner = EstimationRunner()
        assert runner.povm_name(build_run_config({"command": "simulate", "channel": "dephasing"})) == "x-basis"
        assert runner.povm_name(build_run_config({"command": "simulate", "extension": "identity"})) == "eigenframe"

    def test_unknown_povm(self):
        runner = EstimationRunner()
        config = build_run_config({"command": "bound"})
        with pytest.raises(ConfigError):
            runner.povm("y-basis", runner.family(config))

    def test_bound_csv(self, tmp_path):
        out = tmp_path / "bound.csv"
        config = build_run_config(
            {"command": "bound", "channel": "damping", "n_max": "4", "input": "fock:2", "theta_start": "0.2", "theta_stop": "1.0", "points": "5", "out": str(out)}
        )
        report = EstimationRunner().run(config)
        assert report.outputs == [out]
        assert report.metrics["outputs"] == [str(out)]
        assert report.metrics["frames"]["built"] == 5
        assert report.metrics["grid"] == {"points": 5, "clamped_endpoints": 0}
        assert [stage["command"] for stage in report.metrics["stages"]] == ["bound"]
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["theta", "kraus_bound", "sld_fisher"]
        expected = 2.0 / np.expm1(frame["theta"].to_numpy())
        np.testing.assert_allclose(frame["kraus_bound"], expected, rtol=1e-9)
        np.testing.assert_allclose(frame["sld_fisher"], expected, rtol=1e-7)

    def test_csv_text_format(self, tmp_path):
        out = tmp_path / "bound.csv"
        config = build_run_config({"command": "bound", "points": "3", "out": str(out)})
        EstimationRunner().run(config)
        raw = out.read_bytes()
        assert b"\r\n" not in raw
        header, first = raw.decode("utf-8").splitlines()[:2]
        assert header == "theta,kraus_bound,sld_fisher"
        assert float(first.split(",")[0]) == 0.05

    def test_optimality_report(self, tmp_path):
        out = tmp_path / "optimality.json"
        config = build_run_config(
            {"command": "optimality-check", "channel": "dephasing", "theta_start": "0.2", "theta_stop": "1.0", "points": "3", "out": str(out)}
        )
        EstimationRunner().run(config)
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload["povm"] == "x-basis" and payload["input"] == "plus"
        assert len(payload["reports"]) == 3
        assert all(entry["satisfied"] for entry in payload["reports"])

    def test_failure_removes_outputs(self, tmp_path, monkeypatch):
        def broken(path, name, values):
            raise NumericError("disk full")

        monkeypatch.setattr(runner_module, "write_column", broken)
        out = tmp_path / "simulate.json"
        config = build_run_config(
            {
                "command": "simulate",
                "theta": "0.3",
                "shots": "100",
                "trials": "3",
                "out": str(out),
                "estimates_out": str(tmp_path / "estimates.csv"),
            }
        )
        with pytest.raises(NumericError):
            EstimationRunner().run(config)
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []


class TestCli:
    def test_channels_listing(self, capsys):
        assert run(["channels"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5
        assert [line.split("\t")[0] for line in lines] == list(CATALOG)

    def test_channels_json(self, tmp_path):
        out = tmp_path / "channels.json"
        assert run(["channels", "--format", "json", "--out", str(out)]) == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert len(payload["channels"]) == 5
        dephasing = next(entry for entry in payload["channels"] if entry["name"] == "dephasing")
        assert dephasing["domain"] == [0.0, "inf"]

    def test_distance_curves(self, tmp_path):
        single = tmp_path / "single.csv"
        entangled = tmp_path / "entangled.csv"
        assert run(["distance-curve", "--input", "basis:0", "--out", str(single)]) == 0
        assert run(["distance-curve", "--extension", "identity", "--input", "bell:0", "--out", str(entangled)]) == 0
        for path, reference in ((single, lambda p: 6.0 / (p * (9.0 - 6.0 * p))), (entangled, lambda p: 1.0 / (p * (1.0 - p)))):
            frame = pd.read_csv(path)
            assert list(frame.columns) == ["theta", "bound", "eigencoord", "closed_form"]
            assert len(frame) == 19
            expected = reference(frame["theta"].to_numpy())
            np.testing.assert_allclose(frame["bound"], expected, rtol=1e-7)
            np.testing.assert_allclose(frame["closed_form"], expected, rtol=1e-12)
            np.testing.assert_allclose(frame["eigencoord"], expected, rtol=1e-4)

    def test_config_file_and_override(self, tmp_path):
        out = tmp_path / "curve.csv"
        conf = tmp_path / "run.conf"
        conf.write_text(f"command = distance-curve\nchannel = dephasing\ntheta_start = 0.2\ntheta_stop = 1.0\npoints = 9\nout = {tmp_path / 'unused.csv'}\n", encoding="utf-8")
        assert run(["--config", str(conf), "--out", str(out), "--points", "11"]) == 0
        assert out.exists() and not (tmp_path / "unused.csv").exists()
        frame = pd.read_csv(out)
        assert len(frame) == 11
        expected = 4.0 / np.expm1(4.0 * frame["theta"].to_numpy())
        np.testing.assert_allclose(frame["bound"], expected, rtol=1e-9)

    def test_simulate_is_reproducible(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        args = ["simulate", "--theta", "0.3", "--shots", "500", "--trials", "6", "--seed", "18446744073709551615"]
        assert run(args + ["--out", str(first)]) == 0
        assert run(args + ["--out", str(second), "--workers", "3"]) == 0
        assert first.read_bytes() == second.read_bytes()
        payload = json.loads(first.read_text(encoding="utf-8"))
        assert payload["n_trials"] == 6 and len(payload["estimates"]) == 6
        assert payload["seed"] == 2 ** 64 - 1

    def test_unknown_channel(self, tmp_path, capsys):
        out = tmp_path / "bound.csv"
        assert run(["bound", "--channel", "amplitude", "--out", str(out)]) == 2
        (line,) = error_lines(capsys.readouterr().err)
        match = ERROR_LINE.match(line)
        assert match and match.group(1) == "2" and match.group(2) == "UnknownChannelError"
        assert not out.exists()

    def test_validation_exit_code(self, tmp_path, capsys):
        assert run(["distance-curve", "--points", "2", "--out", str(tmp_path / "x.csv")]) == 2
        (line,) = error_lines(capsys.readouterr().err)
        assert ERROR_LINE.match(line).group(2) == "ConfigError"

    def test_unexpected_error_exit_code(self, monkeypatch, capsys, caplog):
        def crash(self, config):
            raise ValueError("worker crashed")

        monkeypatch.setattr(EstimationRunner, "run", crash)
        with caplog.at_level(logging.ERROR, logger="qchanest"):
            assert run(["channels"]) == 1
        (line,) = error_lines(capsys.readouterr().err)
        match = ERROR_LINE.match(line)
        assert match and match.group(1) == "1" and match.group(2) == "ValueError"
        assert line.endswith("message=worker crashed")
        (record,) = [record for record in caplog.records if record.levelno == logging.ERROR]
        assert record.exc_info is not None and record.exc_info[0] is ValueError

    def test_missing_command(self, capsys):
        assert run([]) == 2
        assert error_lines(capsys.readouterr().err)

    def test_settings_file(self, tmp_path, capsys):
        settings = tmp_path / "settings.json"
        settings.write_text(json.dumps({"no_such_setting": 1}), encoding="utf-8")
        assert run(["channels", "--settings", str(settings)]) == 2
        assert error_lines(capsys.readouterr().err)


def test_closed_form_lookup():
    assert closed_form("dephasing", "square", "bell:0")(0.2) == pytest.approx(16.0 / math.expm1(1.6))
    assert closed_form("damping", "none", "fock:3")(0.5) == pytest.approx(3.0 / math.expm1(0.5))
    assert closed_form("damping", "identity", "bell:0") is None


def test_describe_unknown_channel():
    with pytest.raises(UnknownChannelError):
        describe("amplitude")
    assert describe("damping").optimal_povm == "photon-number"
