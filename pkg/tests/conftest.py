"""Shared fixtures."""

from __future__ import annotations

from collections.abc import Iterator

import pytest

from src.config import get_settings
from src.models import GridSpec


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Isolate WAVEMAPS_* settings per test."""
    monkeypatch.setenv("WAVEMAPS_THREADS", "1")
    monkeypatch.setenv("WAVEMAPS_SEED", "0")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def grid_1d() -> GridSpec:
    return GridSpec(dim=1, n_per_axis=128, period=20.0)


@pytest.fixture
def unit_grid() -> GridSpec:
    """Period 2 pi so lattice wavenumbers are integers."""
    return GridSpec(dim=1, n_per_axis=16, period=2.0 * 3.141592653589793)
