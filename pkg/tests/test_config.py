"""Tests for configuration loading."""

import pytest
from pydantic import ValidationError

from haupt.config import (
    PACKAGE_DATA,
    ConfigLoader,
    HauptConfig,
    OutputConfig,
    RunnerConfig,
    WindowConfig,
    get_settings,
    reset_settings,
)


SETTINGS_YAML = """
windows:
  lehner: 300
runner:
  parallelism: 2
catalog:
  path: "${HAUPT_CATALOG:-}"
logging:
  level: "${TEST_LEVEL:-ERROR}"
"""


@pytest.fixture
def config_dir(tmp_path, monkeypatch):
    (tmp_path / "settings.yaml").write_text(SETTINGS_YAML, encoding="utf-8")
    monkeypatch.setenv("HAUPT_CONFIG_DIR", str(tmp_path))
    for name in ("HAUPT_CATALOG", "HAUPT_LOG_LEVEL", "HAUPT_PARALLELISM", "HAUPT_SEED", "TEST_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path


class TestConfigLoader:
    def test_substitution(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TEST_WINDOW", "42")
        monkeypatch.delenv("TEST_MISSING", raising=False)
        loader = ConfigLoader(tmp_path)
        data = loader._substitute_env_vars(
            {"a": "${TEST_WINDOW}", "b": ["${TEST_MISSING:-7}", "${TEST_MISSING}"]}
        )
        assert data == {"a": "42", "b": ["7", ""]}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ConfigLoader(tmp_path).load_yaml("settings.yaml")
        assert ConfigLoader(tmp_path).load_settings_yaml() == {}


class TestModels:
    def test_windows_must_be_positive(self):
        with pytest.raises(ValidationError):
            WindowConfig(weak=0)

    def test_unknown_output_mode(self):
        with pytest.raises(ValidationError):
            OutputConfig(mode="xml")

    def test_parallelism_floor(self):
        assert RunnerConfig(parallelism=0).parallelism == 1


class TestHauptConfig:
    def test_yaml_values(self, config_dir):
        config = HauptConfig()
        assert config.windows.lehner == 300
        assert config.windows.weak == 3500
        assert config.runner.parallelism == 2
        assert config.logging.level == "ERROR"

    def test_empty_catalog_falls_back_to_bundled(self, config_dir):
        assert HauptConfig().catalog.path == PACKAGE_DATA / "catalog.tsv"

    def test_environment_overrides(self, config_dir, monkeypatch):
        monkeypatch.setenv("HAUPT_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("HAUPT_PARALLELISM", "4")
        monkeypatch.setenv("HAUPT_SEED", "99")
        config = HauptConfig()
        assert config.logging.level == "DEBUG"
        assert config.runner.parallelism == 4
        assert config.runner.seed == 99
        assert config.as_dict()["seed"] == 99

    def test_catalog_from_environment(self, config_dir, monkeypatch):
        monkeypatch.setenv("HAUPT_CATALOG", str(config_dir / "mine.tsv"))
        assert HauptConfig().catalog.path == config_dir / "mine.tsv"

    def test_global_settings(self, config_dir):
        first = get_settings()
        assert get_settings() is first
        reset_settings()
        assert get_settings() is not first
