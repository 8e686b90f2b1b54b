"""Tests for the RK4 reference integrator."""

from __future__ import annotations

import pytest

from src.exceptions import ConfigurationError, OracleInstabilityError
from src.models import GridSpec
from src.services.oracle import retained_wavenumber, rk4_oracle
from src.services.propagator import difference, filter_state, free_evolution, state_norm
from src.services.refsol import GeodesicData, constant_map_state, gaussian_theta0, geodesic_state
from src.services.spectral import ScalarField


def test_linear_oracle_matches_free_flow(grid_1d: GridSpec) -> None:
    """Without the nonlinearity RK4 reproduces L_t on the retained modes."""
    data = GeodesicData(gaussian_theta0(grid_1d), ScalarField.zeros(grid_1d))
    s0 = geodesic_state(data, 0.0)
    oracle = rk4_oracle(s0, 2.0**-10, 0.25, 1.0, tau_filter=2.0**-4, nonlinear=False)
    exact = free_evolution(filter_state(s0, 2.0**-4, 1.0), 0.25)
    assert oracle.time == pytest.approx(0.25)
    assert state_norm(difference(oracle, exact), 0.0) < 1e-9 * state_norm(exact, 0.0)


def test_oracle_keeps_constant_map(grid_1d: GridSpec) -> None:
    """Constant maps are stationary."""
    s0 = constant_map_state(grid_1d, [1.0, 0.0, 0.0])
    final = rk4_oracle(s0, 2.0**-8, 0.25, 1.0, tau_filter=2.0**-4)
    assert (final.u - s0.u).max_abs() < 1e-14
    assert final.v.max_abs() < 1e-14


def test_oracle_tracks_geodesic_solution() -> None:
    """For smooth data the truncated system follows the exact wave map."""
    grid = GridSpec(dim=1, n_per_axis=256, period=20.0)
    data = GeodesicData(gaussian_theta0(grid), ScalarField.zeros(grid))
    final = rk4_oracle(geodesic_state(data, 0.0), 2.0**-12, 0.25, 1.0, tau_filter=2.0**-10)
    exact = geodesic_state(data, 0.25)
    assert state_norm(difference(final, exact), 0.0) < 1e-5 * state_norm(exact, 0.0)


def test_oracle_rejects_unstable_step(grid_1d: GridSpec) -> None:
    """k_max tau_fine above the RK4 limit raises with the required step."""
    s0 = constant_map_state(grid_1d, [0.0, 0.0, 1.0])
    k_max = retained_wavenumber(s0, 2.0**-8, 1.0)
    assert 15.0 < k_max < 16.0
    with pytest.raises(OracleInstabilityError) as excinfo:
        rk4_oracle(s0, 0.25, 0.5, 1.0, tau_filter=2.0**-8)
    assert excinfo.value.required_tau == pytest.approx(2.8 / k_max)


def test_oracle_step_must_divide_final_time(grid_1d: GridSpec) -> None:
    """tau_fine must divide t_final."""
    s0 = constant_map_state(grid_1d, [0.0, 0.0, 1.0])
    with pytest.raises(ConfigurationError):
        rk4_oracle(s0, 0.3, 0.5, 1.0, tau_filter=2.0**-4)
