"""Runtime settings for vowelprint.

Values resolve in this order (first wins): explicit overrides (CLI flags),
``VOWELPRINT_*`` environment variables, ``.env``, the TOML file named by
``VOWELPRINT_CONFIG``, and finally the model defaults. Nested models use a
double underscore in environment names, e.g. ``VOWELPRINT_PITCH__F0_MIN=80``.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal, Optional

import structlog
from pydantic import Field, ValidationError
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    TomlConfigSettingsSource,
)

from vowelprint.exceptions import ConfigError
from vowelprint.models.schemas import (
    AnalysisConfig,
    BandConfig,
    ClassifierConfig,
    FrameConfig,
    PitchConfig,
    SegmentationConfig,
    TrendConfig,
)

logger = structlog.get_logger()

CONFIG_ENV_VAR = "VOWELPRINT_CONFIG"


class Settings(BaseSettings):
    """Analysis configuration plus logging preferences."""

    frame: FrameConfig = Field(default_factory=FrameConfig)
    pitch: PitchConfig = Field(default_factory=PitchConfig)
    bands: BandConfig = Field(default_factory=BandConfig)
    trend: TrendConfig = Field(default_factory=TrendConfig)
    segmentation: SegmentationConfig = Field(default_factory=SegmentationConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)

    log_level: str = "WARNING"
    log_format: Literal["json", "console"] = "console"

    model_config = {
        "env_prefix": "VOWELPRINT_",
        "env_nested_delimiter": "__",
        "env_file": ".env",
        "extra": "ignore",
    }

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings, dotenv_settings]
        config_path = os.environ.get(CONFIG_ENV_VAR)
        if config_path:
            sources.append(TomlConfigSettingsSource(settings_cls, toml_file=Path(config_path)))
        return tuple(sources)

    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(
            frame=self.frame,
            pitch=self.pitch,
            bands=self.bands,
            trend=self.trend,
            segmentation=self.segmentation,
            classifier=self.classifier,
        )


def load_settings(overrides: Optional[dict[str, Any]] = None) -> Settings:
    """Build settings, turning every validation or file problem into ConfigError."""
    config_path = os.environ.get(CONFIG_ENV_VAR)
    if config_path and not Path(config_path).is_file():
        raise ConfigError(f"{CONFIG_ENV_VAR} points to a missing file: {config_path}")

    try:
        settings = Settings(**(overrides or {}))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "settings"
        raise ConfigError(f"{where}: {first['msg']}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {config_path}: {exc}") from exc

    logger.debug("Settings loaded", config_file=config_path, overrides=sorted(overrides or {}))
    return settings
