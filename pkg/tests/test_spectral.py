"""Tests for grids, transforms, multipliers and Sobolev norms."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.exceptions import ConfigurationError, GridMismatchError, ShapeMismatchError
from src.models import GridSpec
from src.services.spectral import (
    Field,
    ScalarField,
    apply_multiplier,
    chi,
    filter_pi,
    filter_stats,
    filter_symbol,
    frequency_lattice,
    l2_norm_physical,
    laplacian,
    littlewood_paley,
    low_pass,
    lp_symbol,
    physical_coordinates,
    sobolev_norm,
    to_physical,
    to_spectral,
    wavenumber_magnitude,
)


def _mode(grid: GridSpec, m: int, amplitude: complex = 1.0) -> ScalarField:
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[m] = amplitude
    return ScalarField(grid, coeffs, real=False)


def test_grid_rejects_non_power_of_two() -> None:
    """n_per_axis must be a power of two."""
    with pytest.raises(ValueError):
        GridSpec(dim=1, n_per_axis=100)


def test_lattice_spacing_is_derived() -> None:
    """dk = 2 pi / L and the lattice holds multiples of dk."""
    grid = GridSpec(dim=2, n_per_axis=8, period=20.0)
    k = frequency_lattice(grid)
    assert k.shape == (2, 8, 8)
    assert grid.dk == pytest.approx(math.pi / 10)
    assert np.allclose(k[0][:, 0] / grid.dk, np.fft.fftfreq(8) * 8)


def test_constant_maps_to_unit_zero_mode(grid_1d: GridSpec) -> None:
    """The constant 1 has coefficient 1 at k = 0 and nothing elsewhere."""
    f = to_spectral(np.ones(grid_1d.shape), grid_1d)
    assert f.coeffs[0] == pytest.approx(1.0)
    assert np.max(np.abs(f.coeffs[1:])) < 1e-15


def test_plane_wave_is_single_mode() -> None:
    """e^{i dk x} on N=8 lands on the first lattice mode."""
    grid = GridSpec(dim=1, n_per_axis=8, period=20.0)
    x = physical_coordinates(grid)[0]
    f = to_spectral(np.exp(1j * grid.dk * x), grid)
    assert f.coeffs[1] == pytest.approx(1.0)
    assert np.max(np.abs(np.delete(f.coeffs, 1))) < 1e-14
    assert not f.real


def test_roundtrip_random_field(grid_1d: GridSpec) -> None:
    """to_physical(to_spectral(x)) reproduces x."""
    samples = np.random.default_rng(1).standard_normal(grid_1d.shape)
    back = to_physical(to_spectral(samples, grid_1d))
    assert np.max(np.abs(back - samples)) < 1e-12 * np.max(np.abs(samples))


def test_shape_mismatch_is_rejected(grid_1d: GridSpec) -> None:
    """Samples must match the grid."""
    with pytest.raises(ShapeMismatchError):
        to_spectral(np.ones(64), grid_1d)


def test_sobolev_norm_of_zero_is_zero(grid_1d: GridSpec) -> None:
    """Zero field has norm 0 for any s."""
    assert sobolev_norm(Field.zeros(grid_1d), -1.0) == 0.0
    assert sobolev_norm(Field.zeros(grid_1d), 1.6) == 0.0


def test_sobolev_norm_single_mode(grid_1d: GridSpec) -> None:
    """|a| <k>^s L^(1/2) for one mode."""
    a = 0.3 - 0.4j
    f = _mode(grid_1d, 3, a)
    k = 3 * grid_1d.dk
    expected = abs(a) * (1 + k * k) ** 0.8 * math.sqrt(grid_1d.period)
    assert sobolev_norm(f, 1.6) == pytest.approx(expected, rel=1e-14)


def test_sobolev_norm_matches_brute_force(grid_1d: GridSpec) -> None:
    """Vectorized norm equals a term-by-term sum."""
    rng = np.random.default_rng(7)
    coeffs = np.zeros(grid_1d.shape, dtype=np.complex128)
    idx = rng.choice(grid_1d.n_per_axis, 16, replace=False)
    coeffs[idx] = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    f = ScalarField(grid_1d, coeffs, real=False)
    k = wavenumber_magnitude(grid_1d)
    total = 0.0
    for m in idx:
        total += (1 + k[m] ** 2) ** 1.6 * abs(coeffs[m]) ** 2
    assert sobolev_norm(f, 1.6) == pytest.approx(math.sqrt(grid_1d.period * total), rel=1e-12)


def test_sobolev_norm_monotone_in_s(grid_1d: GridSpec) -> None:
    """s1 <= s2 implies norm(s1) <= norm(s2)."""
    f = to_spectral(np.random.default_rng(2).standard_normal(grid_1d.shape), grid_1d)
    norms = [sobolev_norm(f, s) for s in (-1.0, 0.0, 0.6, 1.6)]
    assert norms == sorted(norms)


def test_l2_parseval(grid_1d: GridSpec) -> None:
    """Physical quadrature equals the s=0 spectral norm."""
    f = to_spectral(np.random.default_rng(3).standard_normal(grid_1d.shape), grid_1d)
    assert l2_norm_physical(f) == pytest.approx(sobolev_norm(f, 0.0), rel=1e-12)


def test_identity_and_laplacian_multipliers(grid_1d: GridSpec) -> None:
    """m = 1 is the identity, -|k|^2 gives the Laplacian eigenvalue."""
    f = _mode(grid_1d, 5)
    assert np.array_equal(apply_multiplier(f, 1.0).coeffs, f.coeffs)
    k = 5 * grid_1d.dk
    assert laplacian(f).coeffs[5] == pytest.approx(-k * k)


def test_composite_multiplier_equals_sequential(grid_1d: GridSpec) -> None:
    """m1 m2 applied at once equals applying them in turn."""
    f = to_spectral(np.random.default_rng(4).standard_normal(grid_1d.shape), grid_1d)
    k = wavenumber_magnitude(grid_1d)
    m1, m2 = np.exp(-k), 1.0 + k * k
    assert np.allclose(
        apply_multiplier(f, m1 * m2).coeffs,
        apply_multiplier(apply_multiplier(f, m1), m2).coeffs,
        rtol=0,
        atol=1e-15,
    )


def test_real_flag_survives_radial_multiplier(grid_1d: GridSpec) -> None:
    """Radial real symbols keep fields real."""
    f = to_spectral(np.random.default_rng(5).standard_normal(grid_1d.shape), grid_1d)
    assert apply_multiplier(f, lambda k: np.exp(-np.abs(k[0]))).real


def test_field_arithmetic_checks_grid(grid_1d: GridSpec) -> None:
    """Fields on different grids cannot be combined."""
    other = GridSpec(dim=1, n_per_axis=64, period=20.0)
    with pytest.raises(GridMismatchError):
        Field.zeros(grid_1d) + Field.zeros(other)


def test_chi_profile() -> None:
    """chi is 1 up to 1/2, 0 from 1, strictly between in the bridge."""
    r = np.array([0.0, 0.5, 0.6, 0.75, 0.9, 1.0, 2.0])
    values = chi(r)
    assert values[0] == 1.0 and values[1] == 1.0
    assert values[5] == 0.0 and values[6] == 0.0
    assert np.all((values[2:5] > 0) & (values[2:5] < 1))
    assert np.all(np.diff(values) <= 0)


def test_filter_keeps_low_and_kills_high_modes(grid_1d: GridSpec) -> None:
    """c tau^(1/2) = 1: |k| <= 1/2 kept, |k| > 1 removed."""
    tau, c = 1e-4, 100.0
    low = _mode(grid_1d, 1)
    high = _mode(grid_1d, 4)
    assert np.array_equal(filter_pi(low, tau, c).coeffs, low.coeffs)
    assert np.all(filter_pi(high, tau, c).coeffs == 0)


def test_filter_rejects_tau_outside_unit_interval(grid_1d: GridSpec) -> None:
    """tau must lie in (0, 1)."""
    with pytest.raises(ConfigurationError):
        filter_pi(Field.zeros(grid_1d), 1.5)


def test_filter_idempotent_outside_transition_band(grid_1d: GridSpec) -> None:
    """Pi^2 f - Pi f vanishes where chi is 0 or 1."""
    tau, c = 0.01, 1.0
    f = to_spectral(np.random.default_rng(6).standard_normal(grid_1d.shape), grid_1d)
    once = filter_pi(f, tau, c)
    twice = filter_pi(once, tau, c)
    symbol = filter_symbol(grid_1d, tau, c)
    transition = (symbol > 0) & (symbol < 1)
    assert np.all(twice.coeffs[~transition] == once.coeffs[~transition])


def test_filter_commutes_with_radial_multiplier(grid_1d: GridSpec) -> None:
    """Diagonal multipliers commute exactly."""
    f = to_spectral(np.random.default_rng(8).standard_normal(grid_1d.shape), grid_1d)
    a = filter_pi(laplacian(f), 0.01, 1.0)
    b = laplacian(filter_pi(f, 0.01, 1.0))
    assert np.array_equal(a.coeffs, b.coeffs)


def test_filter_stats_partition_lattice(grid_1d: GridSpec) -> None:
    """Retained, attenuated and annihilated modes cover the lattice."""
    stats = filter_stats(grid_1d, 0.01, 1.0)
    assert stats.retained + stats.attenuated + stats.annihilated == grid_1d.size
    assert stats.attenuated > 0 and stats.annihilated > 0


def test_littlewood_paley_telescopes(grid_1d: GridSpec) -> None:
    """sum_{k<=K} psi_k = chi(2^-K xi)."""
    xi = wavenumber_magnitude(grid_1d)
    for top in (0, 2, 4):
        total = sum(lp_symbol(grid_1d, k) for k in range(top + 1))
        assert np.allclose(total, chi(xi / 2.0**top), rtol=0, atol=1e-15)


def test_littlewood_paley_supports_at_three(unit_grid: GridSpec) -> None:
    """A mode with |k| = 3 sits in blocks 2 and 3 only."""
    f = _mode(unit_grid, 3)
    assert littlewood_paley(f, 1).max_abs() == 0.0
    assert littlewood_paley(f, 2).max_abs() > 0.0
    assert littlewood_paley(f, 3).max_abs() > 0.0
    assert littlewood_paley(f, 5).max_abs() == 0.0


def test_littlewood_paley_reconstructs_past_nyquist(grid_1d: GridSpec) -> None:
    """Blocks up to past Nyquist sum back to the field."""
    f = to_spectral(np.random.default_rng(9).standard_normal(grid_1d.shape), grid_1d)
    total = sum((littlewood_paley(f, k) for k in range(1, 8)), littlewood_paley(f, 0))
    assert (total - f).max_abs() < 1e-12 * f.max_abs()
    assert (low_pass(f, 7) - f).max_abs() < 1e-12 * f.max_abs()


def test_littlewood_paley_rejects_negative_index(grid_1d: GridSpec) -> None:
    """k must be >= 0."""
    with pytest.raises(ValueError):
        lp_symbol(grid_1d, -1)


@pytest.mark.parametrize("grid", [GridSpec(dim=1, n_per_axis=128, period=20.0),
                                  GridSpec(dim=2, n_per_axis=64, period=2.0 * math.pi)])
def test_littlewood_paley_blocks_two_apart_are_orthogonal(grid: GridSpec) -> None:
    """psi_k1 psi_k2 vanishes identically once |k1 - k2| >= 2."""
    symbols = [lp_symbol(grid, k) for k in range(8)]
    for k1 in range(8):
        for k2 in range(k1 + 2, 8):
            assert np.all(symbols[k1] * symbols[k2] == 0.0)
    assert np.any(symbols[3] * symbols[4] > 0.0)
