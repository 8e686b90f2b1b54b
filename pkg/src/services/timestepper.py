"""Filtered Lie splitting: discrete wave operator, null-form nonlinearity and the time loop."""

from __future__ import annotations

import logging
import time
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from src.config import get_settings
from src.exceptions import BlowUpError, HistoryError
from src.models import FilterPlacement, FilterStats, SchemeParams
from src.services.propagator import StatePair, filter_state, free_evolution
from src.services.spectral import (
    Field,
    ScalarField,
    dot,
    field_to_spectral,
    filter_pi,
    filter_stats,
    gradient_dot,
    gradient_samples,
    scale,
    to_physical,
    wavenumber_magnitude,
)

logger = logging.getLogger(__name__)

Observer = Callable[[int, StatePair], None]


@dataclass(frozen=True)
class History[F: (ScalarField, Field)]:
    """First components at steps n, n-1, n-2."""

    now: F | None = None
    prev: F | None = None
    prev2: F | None = None

    @property
    def complete(self) -> bool:
        return self.now is not None and self.prev is not None and self.prev2 is not None

    def entries(self) -> tuple[F, F, F]:
        if self.now is None or self.prev is None or self.prev2 is None:
            raise HistoryError("history needs steps n, n-1 and n-2")
        return self.now, self.prev, self.prev2

    def map(self, fn: Callable[[F], F]) -> History[F]:
        now, prev, prev2 = self.entries()
        return History(fn(now), fn(prev), fn(prev2))


# ─── Discrete operators ────────────────────────────────────────────────────────


def box_tau[F: (ScalarField, Field)](h: History[F], tau: float) -> F:
    """(u_n - 2u_{n-1} + u_{n-2}) / tau^2 - Delta u_n."""
    now, prev, prev2 = h.entries()
    k = wavenumber_magnitude(now.grid)
    second = (now - 2.0 * prev + prev2) / (tau * tau)
    return second + replace(now, coeffs=now.coeffs * (k * k))


def finite_diff[F: (ScalarField, Field)](u_k: F, u_km: F, m: int, tau: float) -> F:
    """(u_k - u_{k-m}) / (m tau)."""
    if m <= 0:
        raise ValueError(f"difference span must be positive, got m={m}")
    return (u_k - u_km) / (m * tau)


def _dot_history(g: History[Field], h: History[Field]) -> History[ScalarField]:
    g_now, g_prev, g_prev2 = g.entries()
    h_now, h_prev, h_prev2 = h.entries()
    return History(dot(g_now, h_now), dot(g_prev, h_prev), dot(g_prev2, h_prev2))


def null_bracket(g: History[Field], h: History[Field], tau: float) -> ScalarField:
    """box(g.h)_n - g_n . box h_n - h_n . box g_n, products in physical space."""
    g_now = g.entries()[0]
    h_now = h.entries()[0]
    return (
        box_tau(_dot_history(g, h), tau)
        - dot(g_now, box_tau(h, tau))
        - dot(h_now, box_tau(g, tau))
    )


def trilinear_T(f: Field, g: History[Field], h: History[Field], tau: float) -> Field:
    """-f_n (box(g.h)_n - g_n . box h_n - h_n . box g_n)."""
    return -scale(null_bracket(g, h, tau), f)


def null_form_expansion(g: History[Field], h: History[Field], tau: float) -> ScalarField:
    """Right-hand side of the discrete null identity in difference quotients."""
    g_now, g_prev, g_prev2 = g.entries()
    h_now, h_prev, h_prev2 = h.entries()
    dg_now = finite_diff(g_now, g_prev, 1, tau)
    dg_prev = finite_diff(g_prev, g_prev2, 1, tau)
    dh_prev = finite_diff(h_prev, h_prev2, 1, tau)
    d2h_now = finite_diff(h_now, h_prev2, 2, tau)
    return (
        2.0 * (dot(dg_now, dh_prev) - gradient_dot(g_now, h_now))
        - 2.0 * dot(dg_now, d2h_now)
        + 2.0 * dot(dg_prev, d2h_now)
    )


def nonlinearity_tau(
    h: History[Field],
    tau: float,
    filter_constant: float = 100.0,
    placement: FilterPlacement = FilterPlacement.LITERAL,
) -> Field:
    """Velocity increment of the discrete nonlinearity (the position increment is zero).

    -Pi[Pi u_n (box(Pi u_n . Pi u_n)/2 - Pi u_n . box Pi u_n)].

    This is (1/2) T(Pi u, Pi u, Pi u) filtered, not T itself: the factor 1/2 makes the
    continuous limit -u(|u_t|^2 - |grad u|^2), the wave-map nonlinearity.
    """
    if placement is FilterPlacement.LITERAL:
        h = h.map(lambda u: filter_pi(u, tau, filter_constant))
    now, prev, prev2 = h.entries()
    squares = History(dot(now, now), dot(prev, prev), dot(prev2, prev2))
    bracket = 0.5 * box_tau(squares, tau) - dot(now, box_tau(h, tau))
    return filter_pi(-scale(bracket, now), tau, filter_constant)


def continuous_nonlinearity(s: StatePair) -> Field:
    """-u (|u_t|^2 - |grad u|^2) evaluated pseudospectrally."""
    u_samples = to_physical(s.u)
    v_samples = to_physical(s.v)
    grad = gradient_samples(s.u)
    speed = np.sum(v_samples * v_samples, axis=0)
    stretch = np.sum(grad * grad, axis=(0, 1))
    samples = -u_samples * (speed - stretch)[np.newaxis]
    return field_to_spectral(samples, s.grid)


def sphere_deviation(s: StatePair) -> float:
    """max_x | |u(x)| - 1 |."""
    samples = to_physical(s.u)
    modulus = np.sqrt(np.sum(np.abs(samples) ** 2, axis=0))
    return float(np.max(np.abs(modulus - 1.0)))


# ─── Time loop ─────────────────────────────────────────────────────────────────


def lie_step(s: StatePair, h: History[Field], n: int, p: SchemeParams) -> StatePair:
    """u_{n+1} = L_tau(u_n + tau chi_[2tau,inf)(n tau) N_tau(u_n))."""
    if n < 0:
        raise HistoryError(f"step index must be >= 0, got {n}")
    expected = n * p.tau
    if abs(s.time - expected) > 1e-9 * max(1.0, abs(expected)):
        raise HistoryError(f"state time {s.time} inconsistent with step {n} (t={expected})")
    if n < p.activation_steps:
        return free_evolution(s, p.tau)
    increment = nonlinearity_tau(h, p.tau, p.filter_constant, p.filter_placement)
    kicked = StatePair(s.u, s.v + p.tau * increment, s.time)
    return free_evolution(kicked, p.tau)


@dataclass
class Trajectory:
    """Result of one evolution."""

    params: SchemeParams
    final: StatePair
    steps: int
    wall_ms: float
    snapshots: dict[int, StatePair] = field(default_factory=dict)
    deviation: list[tuple[int, float]] = field(default_factory=list)
    filter_stats: FilterStats | None = None


def _finite(s: StatePair, stride: int) -> bool:
    for array in (s.u.coeffs, s.v.coeffs):
        if not np.all(np.isfinite(array.reshape(-1)[::stride])):
            return False
    return True


def evolve(
    s0: StatePair,
    p: SchemeParams,
    observers: Sequence[Observer] = (),
    snapshot_steps: Iterable[int] = (),
    deviation_every: int = 0,
) -> Trajectory:
    """Run the scheme from Pi u(0) to t_end, keeping a three-deep history ring."""
    if s0.time != 0.0:
        raise HistoryError(f"evolution starts at t=0, got t={s0.time}")
    if s0.grid != p.grid:
        raise HistoryError("initial state grid differs from scheme grid")

    started = time.perf_counter()
    stride = max(1, get_settings().nonfinite_stride)
    n_steps = p.n_steps
    wanted = {n for n in snapshot_steps if 0 <= n <= n_steps}
    every = deviation_every or max(1, n_steps // 32)

    state = filter_state(s0, p.tau, p.filter_constant)
    ring: deque[Field] = deque([state.u], maxlen=3)
    snapshots: dict[int, StatePair] = {0: state} if 0 in wanted else {}
    deviation = [(0, sphere_deviation(state))]
    for observer in observers:
        observer(0, state)

    for n in range(n_steps):
        history: History[Field] = (
            History(ring[2], ring[1], ring[0]) if len(ring) == 3 else History()
        )
        state = lie_step(state, history, n, p).at((n + 1) * p.tau)
        step = n + 1
        if not _finite(state, stride):
            logger.warning("Evolution blew up at step %d (tau=%.6g)", step, p.tau)
            raise BlowUpError(step)
        ring.append(state.u)
        if step in wanted:
            snapshots[step] = state
        if step % every == 0 or step == n_steps:
            deviation.append((step, sphere_deviation(state)))
        for observer in observers:
            observer(step, state)

    if not np.all(np.isfinite(state.u.coeffs)) or not np.all(np.isfinite(state.v.coeffs)):
        raise BlowUpError(n_steps)

    wall_ms = (time.perf_counter() - started) * 1000.0
    logger.info(
        "Evolved %d steps at tau=%.6g in %.0f ms (sphere deviation %.3e)",
        n_steps,
        p.tau,
        wall_ms,
        deviation[-1][1],
    )
    return Trajectory(
        params=p,
        final=state,
        steps=n_steps,
        wall_ms=wall_ms,
        snapshots=snapshots,
        deviation=deviation,
        filter_stats=filter_stats(p.grid, p.tau, p.filter_constant),
    )
