"""Shared command plumbing: experiment loading, overrides, output files and exit codes."""

from __future__ import annotations

import argparse
import json
import logging
import tomllib
from collections.abc import Callable
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from src.config import get_settings
from src.exceptions import ConfigurationError, ReportWriteError, WaveMapsError
from src.models import ExperimentConfig

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace], int]


def resolve_config(name: str) -> Path:
    """A file path, or the name of a bundled preset."""
    path = Path(name)
    if path.is_file():
        return path
    preset = get_settings().preset_dir / f"{name.removesuffix('.toml')}.toml"
    if preset.is_file():
        return preset
    raise ConfigurationError(f"config {name!r} is neither a file nor a bundled preset")


def _load_raw(path: Path) -> dict[str, Any]:
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path} does not hold a table of sections")
    return raw


def parse_value(text: str) -> Any:
    """TOML scalar or array; bare words fall back to strings."""
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply dotted key=value assignments in order."""
    for item in overrides:
        key, sep, text = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        *parents, leaf = key.strip().split(".")
        node = raw
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"override {key!r}: {part!r} is not a section")
            node = child
        node[leaf] = parse_value(text.strip())
    return raw


def load_experiment(config: str | None, overrides: list[str] | None = None) -> ExperimentConfig:
    """Parse a TOML preset or JSON dump, apply overrides, validate."""
    raw = _load_raw(resolve_config(config)) if config else {}
    raw = apply_overrides(raw, overrides or [])
    cfg = ExperimentConfig.model_validate(raw)
    return pin_seeds(cfg)


def pin_seeds(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill unset seeds from WAVEMAPS_SEED so a config.json dump replays exactly."""
    seed = get_settings().seed
    updates: dict[str, BaseModel] = {}
    if cfg.data.seed is None:
        updates["data"] = cfg.data.model_copy(update={"seed": seed})
    if cfg.diagnostics.seed is None:
        updates["diagnostics"] = cfg.diagnostics.model_copy(update={"seed": seed})
    return cfg.model_copy(update=updates) if updates else cfg


def write_json(path: Path, model: BaseModel) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc
    return path


def execute(name: str, handler: Handler, args: argparse.Namespace) -> int:
    """Run a command body and map failures to exit codes (0 ok, 1 failure, 2 config)."""
    try:
        return handler(args)
    except ValidationError as exc:
        logger.error("%s: invalid configuration:\n%s", name, exc)
        return 2
    except WaveMapsError as exc:
        logger.error("%s failed: %s", name, exc)
        return exc.exit_code
    except Exception as exc:
        logger.error("%s failed unexpectedly: %s", name, exc, exc_info=True)
        return 1
