"""Configuration module for wavemaps-splitting."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

PRESET_DIR = Path(__file__).resolve().parent / "presets"


class Settings(BaseSettings):
    """Process settings loaded from WAVEMAPS_* environment variables or .env."""

    # App
    app_name: str = "wavemaps-splitting"
    app_version: str = "v20261019-001"
    environment: str = "dev"
    log_level: str = "INFO"

    # Compute
    threads: int = 1
    seed: int = 0
    memory_budget_mb: int = 2048
    nonfinite_stride: int = 7

    # Reports
    deterministic_reports: bool = True
    preset_dir: Path = PRESET_DIR

    model_config = SettingsConfigDict(
        env_prefix="WAVEMAPS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached process settings."""
    return Settings()
