"""
Configuration Management for haupt

Loads and validates configuration from:
- YAML file (config/settings.yaml, or $HAUPT_CONFIG_DIR/settings.yaml)
- Environment variables (.env, HAUPT_* variables)
- Environment variable substitution in YAML (${VAR_NAME}, ${VAR_NAME:-default})

Precedence: explicit CLI flags > environment > YAML > built-in defaults.
"""

import os
import re
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, field_validator
from pydantic_settings import BaseSettings


PACKAGE_DATA = Path(__file__).parent / "data"


# ============================================================
# Configuration Models
# ============================================================

class WindowConfig(BaseModel):
    """Default coefficient windows per check family."""
    compression: int = 2500
    lehner: int = 600
    weak: int = 3500
    general: int = 1000

    @field_validator("compression", "lehner", "weak", "general")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("windows must be positive")
        return value


class CatalogConfig(BaseModel):
    """Where Hauptmodul definitions and group files live."""
    path: Path = PACKAGE_DATA / "catalog.tsv"
    group_dir: Path = PACKAGE_DATA / "groups"
    monster_classes: Path = PACKAGE_DATA / "monster_classes.yaml"
    cache_size: int = 64


class SeriesConfig(BaseModel):
    """Series kernel limits."""
    max_coefficients: int = 200_000
    fast_mul_threshold: int = 64


class RunnerConfig(BaseModel):
    """Check execution."""
    parallelism: int = 1
    seed: int = 20240601

    @field_validator("parallelism")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        return max(1, value)


class OutputConfig(BaseModel):
    """Report rendering."""
    mode: str = "json"

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("json", "tsv"):
            raise ValueError(f"unknown output mode {value!r}")
        return value


class LoggingConfig(BaseModel):
    """Logging configuration."""
    level: str = "WARNING"
    format: str = "console"
    file: str | None = None


# ============================================================
# Environment Settings
# ============================================================

class Settings(BaseSettings):
    """
    Environment overrides loaded with pydantic-settings.

    Only variables that are actually set take effect; unset ones fall back to
    the YAML file and then to the model defaults.
    """

    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore",
    }

    HAUPT_ENV: str = "development"
    HAUPT_CONFIG_DIR: str = "config"
    HAUPT_CATALOG: str | None = None
    HAUPT_GROUP_DIR: str | None = None
    HAUPT_LOG_LEVEL: str | None = None
    HAUPT_OUTPUT: str | None = None
    HAUPT_PARALLELISM: int | None = None
    HAUPT_MAX_COEFFICIENTS: int | None = None
    HAUPT_SEED: int | None = None


# ============================================================
# Configuration Loader
# ============================================================

class ConfigLoader:
    """Loads YAML configuration with environment substitution."""

    _pattern = re.compile(r"\$\{([^}:]+)(?::-([^}]*))?\}")

    def __init__(self, config_dir: Path = Path("config")):
        self.config_dir = config_dir

    def _substitute_env_vars(self, data: Any) -> Any:
        """
        Recursively substitute environment variables in YAML data.

        ``${VAR}`` becomes the value of VAR (empty if unset) and
        ``${VAR:-fallback}`` uses the fallback when VAR is unset.
        """
        if isinstance(data, dict):
            return {k: self._substitute_env_vars(v) for k, v in data.items()}
        if isinstance(data, list):
            return [self._substitute_env_vars(item) for item in data]
        if isinstance(data, str):
            return self._pattern.sub(
                lambda m: os.getenv(m.group(1), m.group(2) or ""), data
            )
        return data

    def load_yaml(self, filename: str) -> dict[str, Any]:
        """Load and parse a YAML configuration file."""
        filepath = self.config_dir / filename

        if not filepath.exists():
            raise FileNotFoundError(f"Configuration file not found: {filepath}")

        with filepath.open(encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}

        return self._substitute_env_vars(data)

    def load_settings_yaml(self) -> dict[str, Any]:
        """Load settings.yaml, or nothing when the file is absent."""
        try:
            return self.load_yaml("settings.yaml")
        except FileNotFoundError:
            return {}


# ============================================================
# Global Configuration
# ============================================================

def _drop_empty(section: dict[str, Any]) -> dict[str, Any]:
    """Unset ${VAR} substitutions arrive as empty strings; let defaults win."""
    return {k: v for k, v in section.items() if v not in ("", None)}


class HauptConfig:
    """Global configuration object combining all sources."""

    def __init__(self, env: Settings | None = None):
        env = env or Settings()
        raw = ConfigLoader(Path(env.HAUPT_CONFIG_DIR)).load_settings_yaml()

        self.environment = env.HAUPT_ENV
        self.windows = WindowConfig(**_drop_empty(raw.get("windows", {})))

        catalog = _drop_empty(raw.get("catalog", {}))
        if env.HAUPT_CATALOG:
            catalog["path"] = env.HAUPT_CATALOG
        if env.HAUPT_GROUP_DIR:
            catalog["group_dir"] = env.HAUPT_GROUP_DIR
        self.catalog = CatalogConfig(**catalog)

        series = _drop_empty(raw.get("series", {}))
        if env.HAUPT_MAX_COEFFICIENTS:
            series["max_coefficients"] = env.HAUPT_MAX_COEFFICIENTS
        self.series = SeriesConfig(**series)

        runner = _drop_empty(raw.get("runner", {}))
        if env.HAUPT_PARALLELISM:
            runner["parallelism"] = env.HAUPT_PARALLELISM
        if env.HAUPT_SEED is not None:
            runner["seed"] = env.HAUPT_SEED
        self.runner = RunnerConfig(**runner)

        output = _drop_empty(raw.get("output", {}))
        if env.HAUPT_OUTPUT:
            output["mode"] = env.HAUPT_OUTPUT
        self.output = OutputConfig(**output)

        logging_cfg = _drop_empty(raw.get("logging", {}))
        if env.HAUPT_LOG_LEVEL:
            logging_cfg["level"] = env.HAUPT_LOG_LEVEL
        self.logging = LoggingConfig(**logging_cfg)

    def as_dict(self) -> dict[str, Any]:
        """Plain snapshot used in report envelopes."""
        return {
            "catalog_path": str(self.catalog.path),
            "windows": self.windows.model_dump(),
            "output": self.output.mode,
            "parallelism": self.runner.parallelism,
            "seed": self.runner.seed,
            "max_coefficients": self.series.max_coefficients,
        }


_settings: HauptConfig | None = None


def get_settings() -> HauptConfig:
    """Get the process-wide configuration, building it on first use."""
    global _settings
    if _settings is None:
        _settings = HauptConfig()
    return _settings


def reset_settings(config: HauptConfig | None = None) -> None:
    """Replace (or drop) the process-wide configuration."""
    global _settings
    _settings = config


__all__ = [
    "PACKAGE_DATA",
    "CatalogConfig",
    "ConfigLoader",
    "HauptConfig",
    "LoggingConfig",
    "OutputConfig",
    "RunnerConfig",
    "SeriesConfig",
    "Settings",
    "WindowConfig",
    "get_settings",
    "reset_settings",
]
