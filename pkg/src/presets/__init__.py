"""Bundled experiment presets (TOML)."""
