"""Shared pytest fixtures for the OrliczLab test suite."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import pytest

from src import cli
from src.config import config_manager
from src.config_schema import LabSettings, RunConfig, apply_settings_defaults
from src.core.orlicz import OrliczFunction

# Env keys that change where reports go or how settings load. Tests must not
# pick them up from the developer's shell or a .env file.
_LAB_ENV_KEYS = (
    "ORLICZLAB_ENV",
    "ORLICZLAB_OUTPUT_DIR",
    "ORLICZLAB_LOG_LEVEL",
    "CI",
)


@pytest.fixture(autouse=True)
def isolated_lab_env(monkeypatch, tmp_path):
    """Reports land in tmp_path/reports; settings come from config/ci.json."""
    for env_key in _LAB_ENV_KEYS:
        monkeypatch.delenv(env_key, raising=False)
    monkeypatch.setenv("ORLICZLAB_OUTPUT_DIR", str(tmp_path / "reports"))
    monkeypatch.setattr(cli, "load_dotenv", lambda *args, **kwargs: False)
    monkeypatch.setattr(config_manager, "environment", "ci")
    yield
    # main() binds a console handler to the captured stderr of the current test
    root = logging.getLogger("orliczlab")
    for handler in list(root.handlers):
        root.removeHandler(handler)


@pytest.fixture
def settings() -> LabSettings:
    return LabSettings()


@pytest.fixture
def make_config(settings) -> Callable[..., RunConfig]:
    """Build a validated RunConfig with settings defaults applied."""

    def _make(command: str, phi: Dict[str, Any] | None = None, **params: Any) -> RunConfig:
        document: Dict[str, Any] = {
            "command": command,
            "params": apply_settings_defaults(command, params, settings),
        }
        if phi is not None:
            document["phi"] = phi
        return RunConfig.model_validate(document)

    return _make


@pytest.fixture
def run_cli(capsys) -> Callable[[List[str]], Tuple[int, str, str]]:
    """Run the command line in-process; returns (exit code, stdout, stderr)."""

    def _run(argv: List[str]) -> Tuple[int, str, str]:
        code = cli.main(argv)
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture
def write_json(tmp_path) -> Callable[[str, Any], Path]:
    def _write(name: str, document: Any) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture(params=["power-1.5", "power-2", "power-log-1", "exp-minus-linear", "linear", "piecewise-linear"])
def builtin_phi(request) -> OrliczFunction:
    """Every builtin family, with representative parameters."""
    return {
        "power-1.5": OrliczFunction.power(1.5),
        "power-2": OrliczFunction.power(2.0),
        "power-log-1": OrliczFunction.power_log(1.0),
        "exp-minus-linear": OrliczFunction.exp_minus_linear(),
        "linear": OrliczFunction.linear(),
        "piecewise-linear": OrliczFunction.piecewise_linear([(0, 0), (1, 1), (2, 3)]),
    }[request.param]
