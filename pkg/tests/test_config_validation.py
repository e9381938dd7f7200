"""
Unit tests for configuration validation

Tests cover:
- LabSettings bounds and unknown-key warnings
- RunConfig command, phi and per-command params validation
- Settings defaults and the config hash
- Sweep homogeneity
- ConfigManager environment detection and file merging
"""

import json

import pytest
from pydantic import ValidationError

from src.config import ConfigManager
from src.config_schema import (
    COMMANDS,
    LabSettings,
    RunConfig,
    SweepConfig,
    apply_settings_defaults,
    config_hash,
    sweep_hash,
    validate_settings_dict,
)

QUADRATIC = {"family": "power", "params": [2]}


class TestLabSettings:
    def test_defaults(self):
        settings = LabSettings()
        assert settings.tol == 1e-9
        assert settings.output_dir == "reports"
        assert settings.log_level == "WARNING"

    def test_unknown_keys_are_reported(self):
        settings, warnings = validate_settings_dict({"tol": 1e-6, "colour": "blue", "_runtime": {}})
        assert settings.tol == 1e-6
        assert warnings == ["Unknown setting 'colour' ignored"]

    @pytest.mark.parametrize(
        "key, value",
        [
            ("tol", 0.0),
            ("tol", 1.5),
            ("grid_ratio", 1.0),
            ("search_max_steps", 0),
            ("mc_mixture", 1.0),
            ("sweep_workers", 65),
            ("output_dir", ""),
            ("log_level", "VERBOSE"),
            ("t_cap", float("inf")),
        ],
    )
    def test_out_of_range_values(self, key, value):
        with pytest.raises(ValueError, match="Configuration validation failed"):
            validate_settings_dict({key: value})

    def test_strings_are_stripped(self):
        settings, _ = validate_settings_dict({"log_level": " DEBUG ", "output_dir": " out "})
        assert settings.log_level == "DEBUG"
        assert settings.output_dir == "out"


class TestRunConfig:
    def test_params_are_completed_with_defaults(self):
        config = RunConfig(command="orlicz.delta2", phi=QUADRATIC)
        assert config.params == {"t0": 1.0, "t_max": 1e6, "grid_size": 200, "fail_threshold": 1e6}
        assert config.output.format == "json"

    def test_typed_params(self):
        config = RunConfig(command="counterexample.mc", phi={"family": "linear"}, params={"seed": 3})
        params = config.typed_params()
        assert params.seed == 3
        assert params.n == 2

    @pytest.mark.parametrize(
        "document, location",
        [
            ({"command": "orlicz.laplace", "phi": QUADRATIC}, "command"),
            ({"command": "orlicz.validate"}, "needs 'phi'"),
            ({"command": "orlicz.validate", "phi": QUADRATIC, "colour": 1}, "colour"),
            ({"command": "orlicz.validate", "phi": QUADRATIC, "params": {"bogus": 1}}, "bogus"),
            ({"command": "orlicz.validate", "phi": {"family": "cubic"}}, "family"),
            ({"command": "orlicz.validate", "phi": {"family": "linear", "params": [2]}}, "no parameters"),
            ({"command": "orlicz.conjugate", "phi": QUADRATIC, "params": {"s": [-1]}}, "dual point"),
            ({"command": "orlicz.delta2", "phi": QUADRATIC, "params": {"t0": 5, "t_max": 2}}, "below t_max"),
            ({"command": "orlicz.kr-probe", "phi": QUADRATIC, "params": {"L": [1.0]}}, "L must exceed 1"),
            ({"command": "counterexample.mc", "phi": QUADRATIC}, "seed"),
            ({"command": "cesaro.pconvex", "params": {"sequence": {"kind": "dyadic-blocks"}, "n": 5, "m": 5}}, "n < m"),
            ({"command": "fn.norm", "phi": QUADRATIC, "params": {"function": [[1, 2, float("nan")]]}}, "function"),
        ],
    )
    def test_invalid_documents(self, document, location):
        with pytest.raises(ValidationError, match=location):
            RunConfig.model_validate(document)

    @pytest.mark.parametrize(
        "sequence, message",
        [
            ({"kind": "seeded-steps"}, "needs a seed"),
            ({"kind": "explicit"}, "needs 'functions'"),
            ({"kind": "geometric"}, "needs 'base'"),
        ],
    )
    def test_sequence_requirements(self, sequence, message):
        with pytest.raises(ValidationError, match=message):
            RunConfig.model_validate({"command": "cesaro.diagnose", "phi": QUADRATIC, "params": {"sequence": sequence}})

    def test_blocks_need_exactly_one_source(self):
        both = {"builtin": "singleton-powers", "records": [{"values": [1]}]}
        with pytest.raises(ValidationError, match="exactly one"):
            RunConfig.model_validate({"command": "dh.table", "phi": QUADRATIC, "params": {"blocks": both}})

    def test_several_trials_need_a_seeded_sequence(self):
        params = {"sequence": {"kind": "dyadic-blocks"}, "trials": 3}
        with pytest.raises(ValidationError, match="seeded"):
            RunConfig.model_validate({"command": "cesaro.supineq", "params": params})

    def test_every_command_has_a_params_model(self):
        assert "counterexample.verify" in COMMANDS
        assert len(COMMANDS) == 19


class TestSettingsDefaults:
    def test_unset_params_come_from_settings(self):
        settings = LabSettings(tol=1e-7, t_cap=500.0)
        params = apply_settings_defaults("orlicz.conjugate", {"s": [1.0]}, settings)
        assert params == {"s": [1.0], "tol": 1e-7, "t_cap": 500.0, "slope_margin": 1e-6}

    def test_explicit_params_win(self):
        params = apply_settings_defaults("orlicz.delta2", {"fail_threshold": 50.0}, LabSettings())
        assert params["fail_threshold"] == 50.0

    def test_settings_names_are_mapped(self):
        settings = LabSettings(search_ratio=1.2, mc_mixture=0.25)
        params = apply_settings_defaults("counterexample.mc", {"seed": 1}, settings)
        assert params["ratio"] == 1.2
        assert params["mixture"] == 0.25

    def test_unknown_command_is_left_alone(self):
        assert apply_settings_defaults("orlicz.laplace", {"x": 1}, LabSettings()) == {"x": 1}


class TestConfigHash:
    def test_hash_ignores_the_output_target(self):
        a = RunConfig(command="orlicz.validate", phi=QUADRATIC)
        b = RunConfig(command="orlicz.validate", phi=QUADRATIC, output={"format": "csv", "path": "x.csv"})
        assert config_hash(a) == config_hash(b)
        assert "output" not in a.canonical()

    def test_hash_sees_every_effective_parameter(self):
        a = RunConfig(command="orlicz.validate", phi=QUADRATIC)
        b = RunConfig(command="orlicz.validate", phi=QUADRATIC, params={"grid_size": 100, "t_max": 10.0})
        c = RunConfig(command="orlicz.validate", phi=QUADRATIC, params={"grid_size": 101})
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)
        assert len(config_hash(a)) == 64

    def test_integers_and_floats_hash_alike(self):
        a = RunConfig(command="orlicz.validate", phi={"family": "power", "params": [2]})
        b = RunConfig(command="orlicz.validate", phi={"family": "power", "params": [2.0]})
        assert config_hash(a) == config_hash(b)


class TestSweepConfig:
    def test_mixed_commands_are_rejected(self):
        with pytest.raises(ValidationError, match="one command"):
            SweepConfig(configs=[
                {"command": "orlicz.validate", "phi": QUADRATIC},
                {"command": "orlicz.delta2", "phi": QUADRATIC},
            ])

    def test_sweeps_default_to_csv(self):
        sweep = SweepConfig(configs=[{"command": "orlicz.validate", "phi": QUADRATIC}])
        assert sweep.output.format == "csv"
        assert sweep.command == "orlicz.validate"
        assert SweepConfig().command is None

    def test_sweep_hash_depends_on_order(self):
        first = {"command": "orlicz.conjugate", "phi": QUADRATIC, "params": {"s": [1]}}
        second = {"command": "orlicz.conjugate", "phi": QUADRATIC, "params": {"s": [2]}}
        assert sweep_hash(SweepConfig(configs=[first, second])) != sweep_hash(SweepConfig(configs=[second, first]))


class TestConfigManager:
    def test_environment_detection(self, monkeypatch):
        assert ConfigManager().get_environment() == "development"
        monkeypatch.setenv("CI", "true")
        assert ConfigManager().get_environment() == "ci"
        monkeypatch.setenv("ORLICZLAB_ENV", "benchmark")
        assert ConfigManager().get_environment() == "benchmark"

    def test_ci_profile_overlays_defaults(self, monkeypatch):
        monkeypatch.delenv("ORLICZLAB_OUTPUT_DIR")
        manager = ConfigManager()
        config = manager.load_config("ci")
        assert config["sweep_workers"] == 2
        assert config["output_dir"] == "build/reports"
        assert config["tol"] == 1e-9
        assert config["_runtime"]["config_file"].endswith("ci.json")

    def test_output_dir_from_the_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv("ORLICZLAB_OUTPUT_DIR", str(tmp_path / "elsewhere"))
        settings = ConfigManager().load_settings("ci")
        assert settings.output_dir == str(tmp_path / "elsewhere")

    def test_development_profile(self):
        assert ConfigManager().load_settings("development").log_level == "INFO"

    def test_unreadable_files_are_skipped(self, tmp_path):
        config_dir = tmp_path / "config"
        config_dir.mkdir()
        (config_dir / "default_config.json").write_text(json.dumps({"tol": 1e-6}))
        (config_dir / "broken.json").write_text("{not json")
        (config_dir / "listed.json").write_text("[1, 2]")
        manager = ConfigManager(base_path=str(tmp_path))
        assert manager.load_settings("broken").tol == 1e-6
        assert manager.load_settings("listed").tol == 1e-6
        assert manager.load_settings("missing").tol == 1e-6

    def test_invalid_profile_raises(self, tmp_path):
        config_dir = tmp_path / "config"
        config_dir.mkdir()
        (config_dir / "bad.json").write_text(json.dumps({"sweep_workers": 0}))
        with pytest.raises(ValueError):
            ConfigManager(base_path=str(tmp_path)).load_settings("bad")

    def test_set_environment(self):
        manager = ConfigManager()
        manager.set_environment("ci")
        assert manager.load_config()["sweep_workers"] == 2
