"""CSV snapshots of states and spectra.

A state file holds one row per grid point with the real-space samples of u and v; a `#`
header carries the GridSpec as JSON, the time stamp and the column names. A spectrum file
holds one row per lattice mode with its integer index, |k| and the complex coefficient.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from src.exceptions import ShapeMismatchError
from src.models import GridSpec
from src.services.propagator import StatePair
from src.services.spectral import (
    ScalarField,
    field_to_spectral,
    to_physical,
    wavenumber_magnitude,
)

logger = logging.getLogger(__name__)

STATE_COLUMNS = ("u0", "u1", "u2", "v0", "v1", "v2")
_FORMAT = "%.17g"


def _header(grid: GridSpec, time: float, columns: list[str]) -> str:
    return "\n".join(
        [
            "wavemaps snapshot",
            f"grid: {grid.model_dump_json()}",
            f"time: {time!r}",
            f"columns: {','.join(columns)}",
        ]
    )


def _read_header(path: Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].strip().partition(": ")
            if sep:
                fields[key] = value
    return fields


def write_state(path: Path, state: StatePair) -> Path:
    """Write real-space samples of (u, v) with a self-describing header."""
    grid = state.grid
    u = np.real(to_physical(state.u)).reshape(3, grid.size)
    v = np.real(to_physical(state.v)).reshape(3, grid.size)
    table = np.concatenate([u, v]).T
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        table,
        fmt=_FORMAT,
        delimiter=",",
        header=_header(grid, state.time, list(STATE_COLUMNS)),
    )
    logger.debug("Wrote state snapshot t=%.6g to %s", state.time, path)
    return path


def read_state(path: Path) -> StatePair:
    """Load a state written by write_state."""
    header = _read_header(path)
    if "grid" not in header:
        raise ShapeMismatchError(f"{path} has no grid header")
    grid = GridSpec.model_validate_json(header["grid"])
    time = float(header.get("time", "0.0"))
    table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if table.shape != (grid.size, len(STATE_COLUMNS)):
        raise ShapeMismatchError(
            f"{path} holds a {table.shape} table, expected {(grid.size, len(STATE_COLUMNS))}"
        )
    samples = table.T.reshape(2, 3, *grid.shape)
    return StatePair(
        field_to_spectral(samples[0], grid),
        field_to_spectral(samples[1], grid),
        time,
    )


def write_spectrum(path: Path, f: ScalarField) -> Path:
    """One row per mode: integer indices, |k|, real and imaginary coefficient."""
    grid = f.grid
    m = np.rint(sfft.fftfreq(grid.n_per_axis) * grid.n_per_axis)
    mesh = np.meshgrid(*([m] * grid.dim), indexing="ij")
    columns = [axis.reshape(-1) for axis in mesh]
    columns.append(wavenumber_magnitude(grid).reshape(-1))
    columns.extend([f.coeffs.real.reshape(-1), f.coeffs.imag.reshape(-1)])
    names = [f"m{axis}" for axis in range(grid.dim)] + ["k_abs", "re", "im"]
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.column_stack(columns),
        fmt=_FORMAT,
        delimiter=",",
        header=_header(grid, 0.0, names),
    )
    return path


def read_spectrum(path: Path) -> ScalarField:
    """Load coefficients written by write_spectrum."""
    header = _read_header(path)
    grid = GridSpec.model_validate_json(header["grid"])
    table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if table.shape != (grid.size, grid.dim + 3):
        raise ShapeMismatchError(f"{path} holds a {table.shape} table for grid {grid}")
    coeffs = (table[:, -2] + 1j * table[:, -1]).reshape(grid.shape)
    return ScalarField(grid, coeffs.astype(np.complex128))
