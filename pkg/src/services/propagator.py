"""Exact free wave evolution of the first-order system, diagonal in Fourier space."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from src.exceptions import GridMismatchError, NonFiniteError
from src.models import GridSpec
from src.services.spectral import (
    ComplexArray,
    Field,
    RealArray,
    ScalarField,
    filter_pi,
    sobolev_norm,
    wavenumber_magnitude,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StatePair:
    """(u, du/dt) at a time stamp."""

    u: Field
    v: Field
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.u.grid != self.v.grid:
            raise GridMismatchError("position and velocity live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    def at(self, time: float) -> StatePair:
        return replace(self, time=time)


@lru_cache(maxsize=32)
def _propagator_entries(grid: GridSpec, t: float) -> tuple[RealArray, RealArray, RealArray]:
    """cos(t|k|), sin(t|k|)/|k| (= t at k = 0) and -|k| sin(t|k|)."""
    k = wavenumber_magnitude(grid)
    cos = np.cos(t * k)
    sin_over_k = t * np.sinc(t * k / np.pi)
    minus_k_sin = -k * np.sin(t * k)
    for entry in (cos, sin_over_k, minus_k_sin):
        entry.setflags(write=False)
    return cos, sin_over_k, minus_k_sin


def _check_time(t: float) -> None:
    if not math.isfinite(t):
        raise NonFiniteError(f"propagation time must be finite, got {t}")


def propagate_pair[F: (ScalarField, Field)](u: F, v: F, t: float) -> tuple[F, F]:
    """Apply the free wave matrix to a (position, velocity) pair of like fields."""
    _check_time(t)
    if u.grid != v.grid:
        raise GridMismatchError("position and velocity live on different grids")
    cos, sin_over_k, minus_k_sin = _propagator_entries(u.grid, float(t))
    u_new: ComplexArray = cos * u.coeffs + sin_over_k * v.coeffs
    v_new: ComplexArray = minus_k_sin * u.coeffs + cos * v.coeffs
    return replace(u, coeffs=u_new), replace(v, coeffs=v_new)


def free_evolution(s: StatePair, t: float) -> StatePair:
    """L_t: exact linear wave flow by time t (negative t allowed)."""
    u, v = propagate_pair(s.u, s.v, t)
    return StatePair(u, v, s.time + t)


def half_wave[F: (ScalarField, Field)](f: F, t: float, sign: int = 1) -> F:
    """e^{+-it|k|} multiplier."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    _check_time(t)
    phase = np.exp(1j * sign * t * wavenumber_magnitude(f.grid))
    return replace(f, coeffs=f.coeffs * phase, real=f.real and t == 0)


def mode_energy(s: StatePair) -> RealArray:
    """Per-mode free energy |k|^2 |u_k|^2 + |v_k|^2 summed over components."""
    k = wavenumber_magnitude(s.grid)
    return np.sum(k * k * np.abs(s.u.coeffs) ** 2 + np.abs(s.v.coeffs) ** 2, axis=0)


def state_norm(s: StatePair, s_u: float, s_v: float | None = None) -> float:
    """||u||_{H^s_u} + ||v||_{H^s_v} with s_v defaulting to s_u - 1."""
    return sobolev_norm(s.u, s_u) + sobolev_norm(s.v, s_u - 1.0 if s_v is None else s_v)


def filter_state(s: StatePair, tau: float, filter_constant: float) -> StatePair:
    """Apply the frequency filter to both components."""
    return StatePair(filter_pi(s.u, tau, filter_constant), filter_pi(s.v, tau, filter_constant),
                     s.time)


def difference(a: StatePair, b: StatePair) -> StatePair:
    return StatePair(a.u - b.u, a.v - b.v, a.time)
