"""Tests for settings resolution: flags, environment, TOML file, defaults."""

import pytest

from vowelprint.config.settings import CONFIG_ENV_VAR, load_settings
from vowelprint.exceptions import ConfigError
from vowelprint.models.schemas import AnalysisConfig


class TestLoadSettings:
    def test_defaults(self):
        settings = load_settings()

        assert settings.analysis_config() == AnalysisConfig()
        assert settings.log_level == "WARNING"
        assert settings.log_format == "console"

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("VOWELPRINT_PITCH__F0_MIN", "80")
        monkeypatch.setenv("VOWELPRINT_LOG_FORMAT", "json")

        settings = load_settings()

        assert settings.pitch.f0_min == 80.0
        assert settings.pitch.f0_max == 350.0
        assert settings.log_format == "json"

    def test_toml_file(self, monkeypatch, tmp_path):
        path = tmp_path / "vowelprint.toml"
        path.write_text(
            "[trend]\nslope_threshold = 150.0\n\n[classifier]\naccept_threshold = 0.5\n",
            encoding="utf-8",
        )
        monkeypatch.setenv(CONFIG_ENV_VAR, str(path))

        settings = load_settings()

        assert settings.trend.slope_threshold == 150.0
        assert settings.classifier.accept_threshold == 0.5

    def test_environment_beats_file(self, monkeypatch, tmp_path):
        path = tmp_path / "vowelprint.toml"
        path.write_text("[pitch]\nf0_min = 90.0\n", encoding="utf-8")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
        monkeypatch.setenv("VOWELPRINT_PITCH__F0_MIN", "80")

        assert load_settings().pitch.f0_min == 80.0

    def test_overrides_beat_environment(self, monkeypatch):
        monkeypatch.setenv("VOWELPRINT_PITCH__F0_MIN", "80")

        settings = load_settings({"pitch": {"f0_min": 95.0}})

        assert settings.pitch.f0_min == 95.0

    def test_missing_file(self, monkeypatch, tmp_path):
        monkeypatch.setenv(CONFIG_ENV_VAR, str(tmp_path / "absent.toml"))

        with pytest.raises(ConfigError, match="missing file"):
            load_settings()

    def test_unparsable_file(self, monkeypatch, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[pitch\nf0_min = \n", encoding="utf-8")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(path))

        with pytest.raises(ConfigError, match="cannot parse"):
            load_settings()

    def test_invalid_environment_value(self, monkeypatch):
        monkeypatch.setenv("VOWELPRINT_PITCH__F0_MIN", "-1")

        with pytest.raises(ConfigError, match="f0_min"):
            load_settings()

    def test_inconsistent_overrides(self):
        with pytest.raises(ConfigError):
            load_settings({"pitch": {"f0_min": 300.0, "f0_max": 200.0}})

    def test_hop_longer_than_frame(self):
        with pytest.raises(ConfigError):
            load_settings({"frame": {"frame_length": 512}})
