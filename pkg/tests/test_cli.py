import argparse
import io
import json
from pathlib import Path

import pytest
from rich.console import Console

from app import main, parse_grid
from cli import commands
from cli.commands import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, Command, run
from cli.config_loader import load_config, parse_config
from core.errors import ConfigError


def _config(tmp_path, **overrides):
    data = {
        "market": {"r": 0.05, "mu": 0.10, "sigma": 0.2},
        "utility": {"kind": "capped_linear", "params": {"H": 1.0}},
        "grids": {"tau": [0.5, 1.0], "x": [0.25, 2.0]},
        "output_dir": str(tmp_path / "out"),
    }
    data.update(overrides)
    return data


def _write(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def _quiet():
    return Console(file=io.StringIO())


class TestConfig:
    def test_valid_config(self, tmp_path):
        config = load_config(_config(tmp_path))
        assert config.market.theta == pytest.approx(0.25, rel=1e-15)
        assert config.grids.tau == (0.5, 1.0)
        assert config.mc.policy == "optimal"

    def test_nonpositive_sigma(self, tmp_path):
        data = _config(tmp_path, market={"r": 0.05, "mu": 0.1, "sigma": 0.0})
        with pytest.raises(ConfigError, match="sigma must be positive"):
            load_config(data)

    def test_unknown_keys(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config(_config(tmp_path, rho=0.3))
        assert info.value.key_path == "rho"
        with pytest.raises(ConfigError) as info:
            load_config(_config(tmp_path, market={"r": 0.05, "mu": 0.1, "sigma": 0.2, "rho": 0.3}))
        assert info.value.key_path == "market.rho"

    def test_missing_block(self, tmp_path):
        data = _config(tmp_path)
        del data["utility"]
        with pytest.raises(ConfigError, match="missing block 'utility'"):
            load_config(data)

    def test_bad_window_and_policy(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(_config(tmp_path, turnpike={"window": [10, 5]}))
        with pytest.raises(ConfigError):
            load_config(_config(tmp_path, mc={"policy": "greedy"}))

    def test_cone_validation(self, tmp_path):
        load_config(_config(tmp_path, market={"r": 0.05, "mu": 0.1, "sigma": 0.2, "cone": "nonneg"}))
        with pytest.raises(ConfigError):
            load_config(_config(tmp_path, market={"r": 0.05, "mu": 0.1, "sigma": 0.2, "cone": "simplex"}))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "market": {\n    "r": 0.05,,\n  }\n}')
        with pytest.raises(ConfigError) as info:
            parse_config(path)
        assert info.value.line == 3
        assert "line 3" in str(info.value)

    def test_parse_grid(self):
        assert parse_grid("0:1:3") == (0.0, 0.5, 1.0)
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid("1:0:3")
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid("0:1")


class TestCommands:
    def test_classify_capped(self, tmp_path):
        config = load_config(_config(tmp_path))
        assert run("classify", config, console=_quiet()) == EXIT_OK
        record = json.loads((tmp_path / "out" / "classify.json").read_text())
        assert record == {"kind": "none", "exact": False}
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["classify"]["files"] == ["classify.json"]

    def test_value_is_idempotent(self, tmp_path):
        config = load_config(_config(tmp_path))
        assert run("value", config, console=_quiet()) == EXIT_OK
        first = (tmp_path / "out" / "value.csv").read_bytes()
        assert run("value", config, console=_quiet()) == EXIT_OK
        assert (tmp_path / "out" / "value.csv").read_bytes() == first
        header = first.decode().splitlines()[0]
        assert header == "tau,x,region,y,u,A,pi_frac"

    def test_bound_without_power_limit_fails(self, tmp_path):
        config = load_config(_config(tmp_path))
        assert run("bound", config, console=_quiet()) == EXIT_FAILED
        assert not (tmp_path / "out" / "bound.json").exists()

    def test_simulate_without_optimal_policy(self, tmp_path):
        data = _config(tmp_path, utility={"kind": "inverse_quartic"})
        config = load_config(data)
        assert run("simulate", config, console=_quiet()) == EXIT_CONFIG
        assert not (tmp_path / "out" / "simulate.json").exists()

    def test_simulate_capped(self, tmp_path):
        data = _config(tmp_path, mc={"n_paths": 2000, "n_steps": 100, "seed": 3, "x0": 0.5})
        assert run("simulate", load_config(data), console=_quiet()) == EXIT_OK
        record = json.loads((tmp_path / "out" / "simulate.json").read_text())
        assert record["budget_ok"] is True
        assert record["reference"] == pytest.approx(0.6233, abs=1e-4)

    def test_quartic_turnpike(self, tmp_path):
        data = _config(
            tmp_path,
            utility={"kind": "inverse_quartic"},
            grids={"tau": [10, 14, 18, 22, 26, 30], "x": [1.0]},
        )
        assert run("turnpike", load_config(data), console=_quiet()) == EXIT_OK
        footer = json.loads((tmp_path / "out" / "turnpike.json").read_text())
        assert footer["dominance_ok"] is True
        assert footer["reports"][0]["fit"]["fitted_rate"] == pytest.approx(0.15, rel=0.05)
        assert (tmp_path / "out" / "turnpike_0.csv").exists()

    def test_unknown_command(self, tmp_path):
        assert run("plot", load_config(_config(tmp_path)), console=_quiet()) == EXIT_CONFIG

    def test_failed_run_leaves_nothing(self, tmp_path, monkeypatch):
        def failing(config, store):
            store.write_json("validate.json", [{"family": "power", "passed": False}])
            return False, [("power.u", "1.0e+00 ❌")]

        monkeypatch.setitem(commands.HANDLERS, Command.VALIDATE, failing)
        config = load_config(_config(tmp_path))
        assert run("validate", config, console=_quiet()) == EXIT_FAILED
        assert list((tmp_path / "out").iterdir()) == []

    @pytest.mark.slow
    def test_validate_example_run(self, tmp_path):
        config = Path(__file__).resolve().parents[1] / "runs" / "example.json"
        assert main(["validate", "--config", str(config), "--out", str(tmp_path / "out")]) == EXIT_OK
        rows = json.loads((tmp_path / "out" / "validate.json").read_text())
        assert rows and all(row["passed"] for row in rows)
        families = {row["family"] for row in rows}
        assert families == {"power", "capped_linear", "piecewise_power", "inverse_quartic", "shifted_exponential"}


class TestMain:
    def test_bad_config_exits_with_two(self, tmp_path):
        path = _write(tmp_path, _config(tmp_path, market={"r": 0.05, "mu": 0.1, "sigma": 0.0}))
        assert main(["classify", "--config", str(path)]) == EXIT_CONFIG

    def test_overrides(self, tmp_path):
        path = _write(tmp_path, _config(tmp_path))
        out = tmp_path / "elsewhere"
        assert main(["value", "--config", str(path), "--out", str(out), "--grid-tau", "1:2:2"]) == EXIT_OK
        lines = (out / "value.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2

    def test_negative_seed(self, tmp_path):
        path = _write(tmp_path, _config(tmp_path))
        assert main(["simulate", "--config", str(path), "--seed", "-1"]) == EXIT_CONFIG
