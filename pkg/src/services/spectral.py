"""Torus grid bookkeeping, spatial transforms, Fourier multipliers and Sobolev norms.

Coefficients refer to the physical plane waves e^{ik.x} on [-L/2, L/2)^dim and use forward
normalization: the constant function 1 has coefficient 1 at k = 0.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Self

import numpy as np
from numpy.typing import NDArray
from scipy import fft as sfft

from src.config import get_settings
from src.exceptions import (
    ConfigurationError,
    GridMismatchError,
    NonFiniteError,
    ShapeMismatchError,
)
from src.models import FilterStats, GridSpec

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
Symbol = Callable[[RealArray], NDArray[np.generic]] | NDArray[np.generic] | float

# Relative tolerance for the conjugate-symmetry (real field) test of a symbol.
_REAL_SYMBOL_RTOL = 1e-12


# ─── Lattice ───────────────────────────────────────────────────────────────────


def _frozen(array: NDArray[np.generic]) -> NDArray[np.generic]:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=64)
def frequency_lattice(grid: GridSpec) -> RealArray:
    """Physical wavenumbers, shape (dim, *grid.shape), in FFT order."""
    k1 = sfft.fftfreq(grid.n_per_axis, d=grid.dx) * 2.0 * np.pi
    mesh = np.meshgrid(*([k1] * grid.dim), indexing="ij")
    return _frozen(np.stack(mesh))  # type: ignore[return-value]


@lru_cache(maxsize=64)
def wavenumber_magnitude(grid: GridSpec) -> RealArray:
    """|k| on the lattice."""
    k = frequency_lattice(grid)
    return _frozen(np.sqrt(np.sum(k * k, axis=0)))  # type: ignore[return-value]


@lru_cache(maxsize=64)
def japanese_bracket(grid: GridSpec) -> RealArray:
    """<k> = (1 + |k|^2)^(1/2) on the lattice."""
    k = wavenumber_magnitude(grid)
    return _frozen(np.sqrt(1.0 + k * k))  # type: ignore[return-value]


@lru_cache(maxsize=64)
def _seam_sign(grid: GridSpec) -> RealArray:
    """(-1)^(m_1 + ... + m_dim): shifts FFT coefficients from x = 0 to x = -L/2."""
    m = np.rint(sfft.fftfreq(grid.n_per_axis) * grid.n_per_axis).astype(np.int64)
    sign1 = np.where(m % 2 == 0, 1.0, -1.0)
    sign = np.ones(grid.shape)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.n_per_axis
        sign = sign * sign1.reshape(shape)
    return _frozen(sign)  # type: ignore[return-value]


@lru_cache(maxsize=16)
def physical_coordinates(grid: GridSpec) -> RealArray:
    """Sample positions x_j = -L/2 + j dx, shape (dim, *grid.shape)."""
    x1 = -grid.period / 2 + grid.dx * np.arange(grid.n_per_axis)
    mesh = np.meshgrid(*([x1] * grid.dim), indexing="ij")
    return _frozen(np.stack(mesh))  # type: ignore[return-value]


def reflect(values: NDArray[np.generic], dim: int) -> NDArray[np.generic]:
    """Evaluate a lattice array at -k (index m -> -m mod N) on the trailing dim axes."""
    out = values
    for axis in range(values.ndim - dim, values.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def _axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(-grid.dim, 0))


def _workers() -> int:
    return max(1, get_settings().threads)


# ─── Fields ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class _Coefficients:
    """Spectral coefficients on one grid with vector-space arithmetic."""

    grid: GridSpec
    coeffs: ComplexArray
    real: bool = True

    def _leading(self) -> tuple[int, ...]:
        return ()

    def __post_init__(self) -> None:
        expected = self._leading() + self.grid.shape
        if self.coeffs.shape != expected:
            raise ShapeMismatchError(
                f"coefficient shape {self.coeffs.shape} does not match {expected}"
            )

    def _same_grid(self, other: _Coefficients) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} and {type(other).__name__}")
        if other.grid != self.grid:
            raise GridMismatchError(f"grid {other.grid} differs from {self.grid}")

    def __add__(self, other: Self) -> Self:
        self._same_grid(other)
        return replace(self, coeffs=self.coeffs + other.coeffs, real=self.real and other.real)

    def __sub__(self, other: Self) -> Self:
        self._same_grid(other)
        return replace(self, coeffs=self.coeffs - other.coeffs, real=self.real and other.real)

    def __neg__(self) -> Self:
        return replace(self, coeffs=-self.coeffs)

    def __mul__(self, scalar: complex) -> Self:
        real = self.real and complex(scalar).imag == 0
        return replace(self, coeffs=self.coeffs * scalar, real=real)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> Self:
        real = self.real and complex(scalar).imag == 0
        return replace(self, coeffs=self.coeffs / scalar, real=real)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


@dataclass(frozen=True, eq=False)
class ScalarField(_Coefficients):
    """One scalar function on the torus."""

    @classmethod
    def zeros(cls, grid: GridSpec) -> ScalarField:
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class Field(_Coefficients):
    """An R^3-valued map on the torus, coefficients stacked as (3, *grid.shape)."""

    def _leading(self) -> tuple[int, ...]:
        return (3,)

    @classmethod
    def zeros(cls, grid: GridSpec) -> Field:
        return cls(grid, np.zeros((3, *grid.shape), dtype=np.complex128))

    @classmethod
    def from_components(cls, parts: tuple[ScalarField, ScalarField, ScalarField]) -> Field:
        grid = parts[0].grid
        for part in parts[1:]:
            if part.grid != grid:
                raise GridMismatchError("field components live on different grids")
        coeffs = np.stack([p.coeffs for p in parts]).astype(np.complex128)
        return cls(grid, coeffs, all(p.real for p in parts))

    def component(self, index: int) -> ScalarField:
        return ScalarField(self.grid, self.coeffs[index].copy(), self.real)

    @property
    def components(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return (self.component(0), self.component(1), self.component(2))


Spectral = ScalarField | Field


# ─── Transforms ────────────────────────────────────────────────────────────────


def _forward(samples: NDArray[np.generic], grid: GridSpec) -> ComplexArray:
    coeffs = sfft.fftn(samples, axes=_axes(grid), norm="forward", workers=_workers())
    return np.asarray(coeffs * _seam_sign(grid), dtype=np.complex128)


def _inverse(coeffs: ComplexArray, grid: GridSpec) -> ComplexArray:
    samples = sfft.ifftn(coeffs * _seam_sign(grid), axes=_axes(grid), norm="forward",
                         workers=_workers())
    return np.asarray(samples, dtype=np.complex128)


def to_spectral(samples: NDArray[np.generic], grid: GridSpec) -> ScalarField:
    """Real-space samples on the grid to spectral coefficients."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ShapeMismatchError(f"samples shape {samples.shape} does not match {grid.shape}")
    return ScalarField(grid, _forward(samples, grid), real=not np.iscomplexobj(samples))


def field_to_spectral(samples: NDArray[np.generic], grid: GridSpec) -> Field:
    """Samples of shape (3, *grid.shape) to a Field."""
    samples = np.asarray(samples)
    if samples.shape != (3, *grid.shape):
        raise ShapeMismatchError(
            f"samples shape {samples.shape} does not match {(3, *grid.shape)}"
        )
    return Field(grid, _forward(samples, grid), real=not np.iscomplexobj(samples))


def to_physical(f: Spectral) -> NDArray[np.generic]:
    """Spectral coefficients to real-space samples (real array for real fields)."""
    samples = _inverse(f.coeffs, f.grid)
    return samples.real.copy() if f.real else samples


# ─── Multipliers ───────────────────────────────────────────────────────────────


def evaluate_symbol(grid: GridSpec, symbol: Symbol) -> NDArray[np.generic]:
    """Evaluate a multiplier symbol on the lattice, shape grid.shape."""
    values = symbol(frequency_lattice(grid)) if callable(symbol) else symbol
    array = np.broadcast_to(np.asarray(values), grid.shape)
    if not np.all(np.isfinite(array)):
        raise NonFiniteError("multiplier symbol is not finite on the lattice")
    return array


def _is_real_symbol(values: NDArray[np.generic], dim: int) -> bool:
    if not np.iscomplexobj(values):
        mirrored = reflect(values, dim)
        return bool(np.allclose(values, mirrored, rtol=_REAL_SYMBOL_RTOL, atol=0.0))
    mirrored = np.conj(reflect(values, dim))
    scale = max(float(np.max(np.abs(values))), 1e-300)
    return bool(np.max(np.abs(values - mirrored)) <= _REAL_SYMBOL_RTOL * scale)


def apply_multiplier[F: (ScalarField, Field)](f: F, symbol: Symbol) -> F:
    """coeffs(k) -> m(k) coeffs(k); keeps the real flag when m(-k) = conj(m(k))."""
    values = evaluate_symbol(f.grid, symbol)
    real = f.real and _is_real_symbol(values, f.grid.dim)
    return replace(f, coeffs=np.asarray(f.coeffs * values, dtype=np.complex128), real=real)


def laplacian[F: (ScalarField, Field)](f: F) -> F:
    k = wavenumber_magnitude(f.grid)
    return apply_multiplier(f, -(k * k))


def _omega(t: RealArray) -> RealArray:
    positive = t > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, t, 1.0)), 0.0)


def chi(r: NDArray[np.generic] | float) -> RealArray:
    """Smooth radial cutoff: 1 for r <= 1/2, 0 for r >= 1."""
    r = np.asarray(r, dtype=np.float64)
    left = _omega(2.0 - 2.0 * r)
    right = _omega(2.0 * r - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        bridge = left / (left + right)
    return np.where(r <= 0.5, 1.0, np.where(r >= 1.0, 0.0, bridge))


def _check_tau(tau: float) -> None:
    if not 0.0 < tau < 1.0:
        raise ConfigurationError(f"filter step tau={tau} outside (0, 1)")


@lru_cache(maxsize=128)
def filter_symbol(grid: GridSpec, tau: float, filter_constant: float = 100.0) -> RealArray:
    """chi(c tau^(1/2) |k|) on the lattice."""
    _check_tau(tau)
    return _frozen(chi(filter_constant * np.sqrt(tau) * wavenumber_magnitude(grid)))  # type: ignore[return-value]


def filter_pi[F: (ScalarField, Field)](f: F, tau: float, filter_constant: float = 100.0) -> F:
    """Frequency filter Pi at step tau."""
    return apply_multiplier(f, filter_symbol(f.grid, tau, filter_constant))


def filter_stats(grid: GridSpec, tau: float, filter_constant: float = 100.0) -> FilterStats:
    """Count lattice modes kept, attenuated and annihilated by the filter."""
    symbol = filter_symbol(grid, tau, filter_constant)
    retained = int(np.count_nonzero(symbol == 1.0))
    annihilated = int(np.count_nonzero(symbol == 0.0))
    return FilterStats(
        tau=tau,
        filter_constant=filter_constant,
        retained=retained,
        attenuated=symbol.size - retained - annihilated,
        annihilated=annihilated,
    )


def lp_symbol(grid: GridSpec, k: int) -> RealArray:
    """Dyadic cutoff psi_k(|xi|): chi for k = 0, chi(2^-k xi) - chi(2^(1-k) xi) otherwise."""
    if k < 0:
        raise ValueError(f"Littlewood-Paley index must be >= 0, got {k}")
    xi = wavenumber_magnitude(grid)
    if k == 0:
        return chi(xi)
    return chi(xi / 2.0**k) - chi(xi / 2.0 ** (k - 1))


def littlewood_paley[F: (ScalarField, Field)](f: F, k: int) -> F:
    """Smooth dyadic block P_k."""
    return apply_multiplier(f, lp_symbol(f.grid, k))


def low_pass[F: (ScalarField, Field)](f: F, k: int) -> F:
    """P_{<=K} with symbol chi(2^-K |xi|)."""
    return apply_multiplier(f, chi(wavenumber_magnitude(f.grid) / 2.0**k))


# ─── Norms ─────────────────────────────────────────────────────────────────────


def sobolev_norm(f: Spectral, s: float) -> float:
    """(L^dim sum <k>^(2s) |c_k|^2)^(1/2), summed over components."""
    if not np.all(np.isfinite(f.coeffs)):
        raise NonFiniteError("non-finite coefficients in Sobolev norm")
    weight = japanese_bracket(f.grid) ** (2.0 * s)
    total = float(np.sum(weight * np.abs(f.coeffs) ** 2))
    return float(np.sqrt(f.grid.period**f.grid.dim * total))


def l2_norm_physical(f: Spectral) -> float:
    """L^2 norm by quadrature on the grid samples."""
    samples = to_physical(f)
    return float(np.sqrt(np.sum(np.abs(samples) ** 2) * f.grid.dx**f.grid.dim))


# ─── Physical-space products ───────────────────────────────────────────────────


def _check_pair(a: Spectral, b: Spectral) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid {a.grid} differs from {b.grid}")


def dot(u: Field, w: Field) -> ScalarField:
    """Pointwise R^3 dot product u . w."""
    _check_pair(u, w)
    product = np.sum(to_physical(u) * to_physical(w), axis=0)
    return ScalarField(u.grid, _forward(product, u.grid), real=u.real and w.real)


def scale(f: ScalarField, u: Field) -> Field:
    """Pointwise product of a scalar with every component of a map."""
    _check_pair(f, u)
    product = to_physical(f)[np.newaxis] * to_physical(u)
    return Field(u.grid, _forward(product, u.grid), real=f.real and u.real)


def gradient_samples(f: Spectral) -> NDArray[np.generic]:
    """Physical samples of the gradient, shape (dim, *leading, *grid.shape)."""
    k = frequency_lattice(f.grid)
    lead = f.coeffs.ndim - f.grid.dim
    parts = []
    for axis in range(f.grid.dim):
        kk = k[axis].reshape((1,) * lead + f.grid.shape)
        derivative = replace(f, coeffs=np.asarray(1j * kk * f.coeffs, dtype=np.complex128))
        parts.append(to_physical(derivative))
    return np.stack(parts)


def gradient_dot(u: Field, w: Field) -> ScalarField:
    """Pointwise sum over axes and components of grad u . grad w."""
    _check_pair(u, w)
    product = np.sum(gradient_samples(u) * gradient_samples(w), axis=(0, 1))
    return ScalarField(u.grid, _forward(product, u.grid), real=u.real and w.real)
