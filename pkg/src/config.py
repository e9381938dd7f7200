"""
Centralized configuration management for OrliczLab
Loads environment-specific numerical settings and validates them with pydantic
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from .config_schema import LabSettings, validate_settings_dict

logger = logging.getLogger("orliczlab.config")


class ConfigManager:
    """Manages settings loading and validation"""

    def __init__(self, base_path: Optional[str] = None):
        self.base_path = Path(base_path) if base_path else Path(__file__).parent.parent
        self.config_dir = self.base_path / "config"
        self.environment = self._detect_environment()

    def _detect_environment(self) -> str:
        """Explicit ORLICZLAB_ENV wins; CI runners get the ci profile."""
        env_var = os.getenv("ORLICZLAB_ENV")
        if env_var:
            return env_var
        if os.getenv("CI"):
            return "ci"
        return "development"

    def _read_json(self, path: Path) -> Dict[str, Any]:
        if not path.exists():
            return {}
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            logger.warning(f"Could not load config {path.name}: {e}")
            return {}
        if not isinstance(data, dict):
            logger.warning(f"Config {path.name} is not a JSON object, ignored")
            return {}
        return data

    def load_config(self, config_name: Optional[str] = None) -> Dict[str, Any]:
        """
        Load raw settings: default_config.json overlaid by the environment file

        Args:
            config_name: Specific config file name (without .json)
                        If None, uses environment-based config

        Returns:
            Configuration dictionary (unvalidated)
        """
        if config_name is None:
            config_name = self.environment

        config_file = self.config_dir / f"{config_name}.json"
        config = {
            **self._read_json(self.config_dir / "default_config.json"),
            **self._read_json(config_file),
        }

        output_dir = os.getenv("ORLICZLAB_OUTPUT_DIR")
        if output_dir:
            config["output_dir"] = output_dir

        config["_runtime"] = {
            "environment": self.environment,
            "config_file": str(config_file),
            "base_path": str(self.base_path),
        }
        return config

    def load_settings(self, config_name: Optional[str] = None) -> LabSettings:
        """Load and validate settings.

        Raises:
            ValueError: If the merged settings are invalid
        """
        settings, warnings = validate_settings_dict(self.load_config(config_name))
        for warning in warnings:
            logger.warning(f"Config validation warning: {warning}")
        logger.debug(f"✅ Settings loaded for environment '{self.environment}'")
        return settings

    def get_environment(self) -> str:
        """Get current environment"""
        return self.environment

    def set_environment(self, environment: str) -> None:
        """Set environment for config loading"""
        self.environment = environment


config_manager = ConfigManager()


def load_settings() -> LabSettings:
    """Load settings for the current environment"""
    return config_manager.load_settings()
