"""Classical RK4 integration of the frequency-truncated wave maps system.

Serves as an independent brute-force reference: the splitting scheme and this integrator
share only the spectral primitives.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from src.exceptions import ConfigurationError, NonFiniteError, OracleInstabilityError
from src.models import steps_for
from src.services.propagator import StatePair, filter_state
from src.services.spectral import (
    Field,
    filter_pi,
    filter_symbol,
    laplacian,
    wavenumber_magnitude,
)
from src.services.timestepper import continuous_nonlinearity

logger = logging.getLogger(__name__)

# RK4 stability interval on the imaginary axis is |z| <= 2 sqrt(2).
STABILITY_LIMIT = 2.8


def retained_wavenumber(s: StatePair, tau_filter: float, filter_constant: float) -> float:
    """Largest |k| the filter does not annihilate."""
    symbol = filter_symbol(s.grid, tau_filter, filter_constant)
    k = wavenumber_magnitude(s.grid)
    kept = k[symbol > 0.0]
    return float(np.max(kept)) if kept.size else 0.0


def rk4_oracle(
    s0: StatePair,
    tau_fine: float,
    t_final: float,
    filter_constant: float,
    tau_filter: float,
    nonlinear: bool = True,
) -> StatePair:
    """Integrate u' = v, v' = Delta u + Pi N(Pi u, Pi v) from Pi s0 with step tau_fine."""
    n_steps = steps_for(t_final, tau_fine)
    if n_steps is None:
        raise ConfigurationError(f"oracle step {tau_fine} does not divide t_final={t_final}")
    k_max = retained_wavenumber(s0, tau_filter, filter_constant)
    if k_max * tau_fine > STABILITY_LIMIT:
        raise OracleInstabilityError(tau_fine, STABILITY_LIMIT / k_max)

    def rhs(u: Field, v: Field) -> tuple[Field, Field]:
        acceleration = laplacian(u)
        if nonlinear:
            truncated = filter_state(StatePair(u, v), tau_filter, filter_constant)
            force = continuous_nonlinearity(truncated)
            acceleration = acceleration + filter_pi(force, tau_filter, filter_constant)
        return v, acceleration

    started = time.perf_counter()
    state = filter_state(s0, tau_filter, filter_constant)
    u, v = state.u, state.v
    h = tau_fine
    for _ in range(n_steps):
        k1u, k1v = rhs(u, v)
        k2u, k2v = rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v)
        k3u, k3v = rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v)
        k4u, k4v = rhs(u + h * k3u, v + h * k3v)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(u.coeffs)) and np.all(np.isfinite(v.coeffs))):
        raise NonFiniteError(f"oracle produced non-finite values at tau_fine={tau_fine}")

    logger.info(
        "RK4 oracle: %d steps of %.3g to t=%.6g in %.0f ms",
        n_steps,
        tau_fine,
        t_final,
        (time.perf_counter() - started) * 1000.0,
    )
    return StatePair(u, v, s0.time + n_steps * tau_fine)
