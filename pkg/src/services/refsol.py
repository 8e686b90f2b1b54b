"""Initial and reference data: geodesic wave maps, rough spectra, the 1D Gaussian dataset."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from src.config import get_settings
from src.exceptions import ConfigurationError, GridMismatchError, SeamDecayError
from src.models import DataConfig, DataSource, GridSpec
from src.services.propagator import StatePair, propagate_pair
from src.services.snapshots import read_state
from src.services.spectral import (
    Field,
    ScalarField,
    field_to_spectral,
    laplacian,
    physical_coordinates,
    reflect,
    to_physical,
    to_spectral,
    wavenumber_magnitude,
)
from src.services.timestepper import continuous_nonlinearity

logger = logging.getLogger(__name__)

TANGENCY_TOLERANCE = 1e-8
SEAM_TOLERANCE = 1e-12


def _conjugate_symmetric(f: ScalarField) -> bool:
    mirrored = np.conj(reflect(f.coeffs, f.grid.dim))
    scale = max(f.max_abs(), 1e-300)
    return bool(np.max(np.abs(f.coeffs - mirrored)) <= 1e-12 * scale)


@dataclass(frozen=True)
class GeodesicData:
    """Angle and angular velocity of a geodesic wave map u = (cos theta, sin theta, 0)."""

    theta0: ScalarField
    thetadot0: ScalarField

    def __post_init__(self) -> None:
        if self.theta0.grid != self.thetadot0.grid:
            raise GridMismatchError("theta0 and thetadot0 live on different grids")
        for name, f in (("theta0", self.theta0), ("thetadot0", self.thetadot0)):
            if not _conjugate_symmetric(f):
                raise ValueError(f"{name} must be real-valued")

    @property
    def grid(self) -> GridSpec:
        return self.theta0.grid


def _planar(theta: NDArray[np.float64], grid: GridSpec) -> Field:
    return field_to_spectral(np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)]),
                             grid)


def geodesic_state(d: GeodesicData, t: float) -> StatePair:
    """Exact wave map at time t: theta evolves by the scalar free wave flow."""
    theta, theta_dot = propagate_pair(d.theta0, d.thetadot0, t)
    angle = np.real(to_physical(theta))
    rate = np.real(to_physical(theta_dot))
    velocity = np.stack([-np.sin(angle) * rate, np.cos(angle) * rate, np.zeros_like(angle)])
    return StatePair(_planar(angle, d.grid), field_to_spectral(velocity, d.grid), t)


# ─── Generators ────────────────────────────────────────────────────────────────


def rough_theta0(
    grid: GridSpec,
    s: float,
    seed: int | None = None,
    random_phases: bool = False,
) -> ScalarField:
    """<k>^-(s + dim/2) / log(2 + |k|^2) spectrum, zero phases unless random_phases."""
    if s <= 0:
        raise ConfigurationError(f"rough data needs s > 0, got {s}")
    k = wavenumber_magnitude(grid)
    magnitude = (1.0 + k * k) ** (-(s + grid.dim / 2.0) / 2.0) / np.log(2.0 + k * k)
    coeffs = magnitude.astype(np.complex128)
    if random_phases:
        rng = np.random.default_rng(seed)
        phase = rng.uniform(-np.pi, np.pi, grid.shape)
        phase = 0.5 * (phase - reflect(phase, grid.dim))
        coeffs = coeffs * np.exp(1j * phase)
    return ScalarField(grid, coeffs)


def gaussian_theta0(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0) -> ScalarField:
    """A exp(-|x|^2 / (2 w^2)) sampled on the grid."""
    x = physical_coordinates(grid)
    r2 = np.sum(x * x, axis=0)
    return to_spectral(amplitude * np.exp(-r2 / (2.0 * width * width)), grid)


def fig1_initial_data(grid: GridSpec) -> StatePair:
    """Rotated spherical profile from theta = 2 exp(-x^2), phi = x exp(-x^2); zero velocity."""
    if grid.dim != 1:
        raise ConfigurationError(f"the one-dimensional dataset needs dim=1, got {grid.dim}")
    edge = grid.period / 2.0
    seam = max(2.0 * math.exp(-edge * edge), edge * math.exp(-edge * edge))
    if seam >= SEAM_TOLERANCE:
        raise SeamDecayError(
            f"profile is {seam:.3e} at the seam x=+-{edge:g}; enlarge the period"
        )
    x = physical_coordinates(grid)[0]
    theta = 2.0 * np.exp(-x * x)
    phi = x * np.exp(-x * x)
    root = 1.0 / math.sqrt(2.0)
    u = np.stack(
        [
            root * (-np.cos(theta) + np.sin(theta) * np.sin(phi)),
            -np.sin(theta) * np.cos(phi),
            root * (np.cos(theta) + np.sin(theta) * np.sin(phi)),
        ]
    )
    return StatePair(field_to_spectral(u, grid), Field.zeros(grid))


def constant_map_state(grid: GridSpec, point: list[float] | tuple[float, ...]) -> StatePair:
    """u = p everywhere, v = 0."""
    p = np.asarray(point, dtype=np.float64)
    if p.shape != (3,) or abs(float(np.linalg.norm(p)) - 1.0) > 1e-12:
        raise ConfigurationError(f"constant map needs a unit vector in R^3, got {list(point)}")
    coeffs = np.zeros((3, *grid.shape), dtype=np.complex128)
    coeffs[(slice(None),) + (0,) * grid.dim] = p
    return StatePair(Field(grid, coeffs), Field.zeros(grid))


def check_tangency(s: StatePair, tolerance: float = TANGENCY_TOLERANCE) -> float:
    """max_x |u . v|; logs a warning above tolerance."""
    product = np.sum(np.real(to_physical(s.u)) * np.real(to_physical(s.v)), axis=0)
    worst = float(np.max(np.abs(product)))
    if worst > tolerance:
        logger.warning("Initial velocity is not tangent to the sphere: max |u.v| = %.3e", worst)
    return worst


# ─── Dispatch ──────────────────────────────────────────────────────────────────


def _seed(data: DataConfig) -> int:
    return data.seed if data.seed is not None else get_settings().seed


def geodesic_data_for(data: DataConfig, grid: GridSpec) -> GeodesicData:
    """Geodesic angle data for the smooth or rough sources (zero initial angular velocity)."""
    if data.source is DataSource.GEODESIC_SMOOTH:
        theta0 = gaussian_theta0(grid, data.amplitude, data.width)
    elif data.source is DataSource.GEODESIC_ROUGH:
        theta0 = rough_theta0(grid, data.s, _seed(data), data.random_phases)
    else:
        raise ConfigurationError(f"{data.source.value} is not a geodesic data source")
    return GeodesicData(theta0, ScalarField.zeros(grid))


def build_initial_state(data: DataConfig, grid: GridSpec) -> StatePair:
    """Unfiltered initial state u(0) for any data source."""
    if data.is_geodesic:
        return geodesic_state(geodesic_data_for(data, grid), 0.0)
    if data.source is DataSource.FIG1_1D:
        return fig1_initial_data(grid)
    if data.source is DataSource.CONSTANT_MAP:
        return constant_map_state(grid, data.constant)
    state = read_state(Path(str(data.path)))
    if state.grid != grid:
        raise GridMismatchError(f"{data.path} is on {state.grid}, expected {grid}")
    check_tangency(state)
    return state.at(0.0)


def exact_state(data: DataConfig, grid: GridSpec, t: float) -> StatePair:
    """Closed-form solution at time t for geodesic and constant-map data."""
    if data.is_geodesic:
        return geodesic_state(geodesic_data_for(data, grid), t)
    if data.source is DataSource.CONSTANT_MAP:
        return constant_map_state(grid, data.constant).at(t)
    raise ConfigurationError(f"no exact solution for data source {data.source.value}")


def pde_residual(d: GeodesicData, t: float, h: float = 1e-3) -> float:
    """max_x |centered u_tt - Delta u + u(|u_t|^2 - |grad u|^2)| at time t."""
    before = geodesic_state(d, t - h)
    now = geodesic_state(d, t)
    after = geodesic_state(d, t + h)
    second = (after.u - 2.0 * now.u + before.u) / (h * h)
    residual = second - laplacian(now.u) - continuous_nonlinearity(now)
    return float(np.max(np.abs(to_physical(residual))))
