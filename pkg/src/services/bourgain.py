"""Discrete Bourgain-space diagnostics on finite periodic time windows.

The spacetime transform is F(sigma, xi) = tau sum_n u_hat_n(xi) e^{-i n tau sigma}, with
u_hat_n(xi) = L^dim c_n(xi) the torus Fourier transform and sigma on the M-point lattice of
[-pi/tau, pi/tau). Time is periodic with period M tau.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import fft as sfft

from src.exceptions import (
    GridMismatchError,
    InadmissibleExponentsError,
    ShapeMismatchError,
    SupportViolationError,
)
from src.models import (
    CheckStatus,
    GridSpec,
    MonitorReport,
    StrichartzReport,
    StrichartzRow,
    WeightVariant,
)
from src.services.propagator import StatePair, free_evolution, half_wave
from src.services.spectral import (
    ComplexArray,
    Field,
    RealArray,
    ScalarField,
    apply_multiplier,
    chi,
    lp_symbol,
    sobolev_norm,
    to_physical,
    wavenumber_magnitude,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpacetimeSequence:
    """Frames u_n, n = 0..M-1, stacked as (M, *leading, *grid.shape)."""

    tau: float
    grid: GridSpec
    coeffs: ComplexArray

    def __post_init__(self) -> None:
        if self.coeffs.ndim < 1 + self.grid.dim or self.coeffs.shape[-self.grid.dim:] != (
            self.grid.shape
        ):
            raise ShapeMismatchError(
                f"sequence shape {self.coeffs.shape} does not end with {self.grid.shape}"
            )

    @classmethod
    def from_frames(cls, frames: list[ScalarField] | list[Field], tau: float) -> SpacetimeSequence:
        if not frames:
            raise ValueError("a spacetime sequence needs at least one frame")
        grid = frames[0].grid
        if any(f.grid != grid for f in frames):
            raise GridMismatchError("frames live on different grids")
        return cls(tau, grid, np.stack([f.coeffs for f in frames]).astype(np.complex128))

    @property
    def window(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def leading(self) -> tuple[int, ...]:
        return tuple(self.coeffs.shape[1 : self.coeffs.ndim - self.grid.dim])

    def frame(self, n: int) -> ComplexArray:
        return self.coeffs[n]

    def with_coeffs(self, coeffs: ComplexArray) -> SpacetimeSequence:
        return SpacetimeSequence(self.tau, self.grid, coeffs)


# ─── Symbols and lattices ──────────────────────────────────────────────────────


def dtau(x: NDArray[np.generic] | float, tau: float) -> NDArray[np.complex128]:
    """d_tau(x) = (e^{i x tau} - 1) / tau."""
    return np.asarray(np.expm1(1j * np.asarray(x) * tau) / tau, dtype=np.complex128)


def bracket(z: NDArray[np.generic]) -> RealArray:
    """<z> = (1 + |z|^2)^(1/2)."""
    return np.sqrt(1.0 + np.abs(z) ** 2)


def sigma_lattice(window: int, tau: float) -> RealArray:
    """Temporal frequencies 2 pi m / (M tau), FFT order, inside [-pi/tau, pi/tau)."""
    return sfft.fftfreq(window, d=tau) * 2.0 * np.pi


def _broadcast(seq: SpacetimeSequence) -> tuple[RealArray, RealArray]:
    """|sigma| and |xi| broadcast against seq.coeffs."""
    lead = len(seq.leading)
    sigma = np.abs(sigma_lattice(seq.window, seq.tau)).reshape(
        (seq.window,) + (1,) * (lead + seq.grid.dim)
    )
    xi = wavenumber_magnitude(seq.grid).reshape((1,) + (1,) * lead + seq.grid.shape)
    return sigma, xi


def _spacing(seq: SpacetimeSequence) -> float:
    """Delta sigma * Delta k^dim."""
    return float(2.0 * np.pi / (seq.window * seq.tau) * seq.grid.dk**seq.grid.dim)


def spacetime_transform(seq: SpacetimeSequence) -> ComplexArray:
    """Semidiscrete spacetime transform on the (sigma, xi) lattice."""
    scaled = seq.coeffs * seq.grid.period**seq.grid.dim
    return np.asarray(seq.tau * sfft.fft(scaled, axis=0), dtype=np.complex128)


def inverse_spacetime_transform(
    transform: ComplexArray, tau: float, grid: GridSpec
) -> SpacetimeSequence:
    """Recover frames from their spacetime transform."""
    frames = sfft.ifft(transform / tau, axis=0) / grid.period**grid.dim
    return SpacetimeSequence(tau, grid, np.asarray(frames, dtype=np.complex128))


def l2_norm(seq: SpacetimeSequence) -> float:
    """||u||_{l^2_tau L^2} = (tau sum_n ||u_n||_{L^2}^2)^(1/2) by quadrature on the samples."""
    axes = tuple(range(seq.coeffs.ndim - seq.grid.dim, seq.coeffs.ndim))
    samples = sfft.ifftn(seq.coeffs, axes=axes, norm="forward")
    total = float(np.sum(np.abs(samples) ** 2)) * seq.grid.dx**seq.grid.dim
    return math.sqrt(seq.tau * total)


def spectral_l2_norm(seq: SpacetimeSequence) -> float:
    """Same norm from the transform: ((2 pi)^-(d+1) sum |F|^2 dsigma dk^d)^(1/2)."""
    transform = spacetime_transform(seq)
    mass = float(np.sum(np.abs(transform) ** 2)) * _spacing(seq)
    return math.sqrt(mass / (2.0 * np.pi) ** (seq.grid.dim + 1))


def bourgain_weights(
    seq: SpacetimeSequence,
    s: float,
    b: float,
    variant: WeightVariant = WeightVariant.LITERAL,
) -> RealArray:
    """<d(|sigma|+|xi|)>^s <d(|sigma|-|xi|)>^b, or the surrogate <|d(sigma)|+|d(xi)|>^s."""
    sigma, xi = _broadcast(seq)
    if variant is WeightVariant.LITERAL:
        space = bracket(dtau(sigma + xi, seq.tau))
    else:
        space = bracket(np.abs(dtau(sigma, seq.tau)) + np.abs(dtau(xi, seq.tau)))
    cone = bracket(dtau(sigma - xi, seq.tau))
    return np.asarray(space**s * cone**b, dtype=np.float64)


def check_support(seq: SpacetimeSequence, rtol: float = 1e-14) -> None:
    """Reject frames with spatial frequencies beyond pi/(2 tau)."""
    limit = np.pi / (2.0 * seq.tau)
    outside = wavenumber_magnitude(seq.grid) > limit
    if not outside.any():
        return
    magnitude = np.abs(seq.coeffs)
    scale_ = float(magnitude.max()) if magnitude.size else 0.0
    leaked = float(magnitude[..., outside].max()) if scale_ else 0.0
    if leaked > rtol * scale_:
        raise SupportViolationError(
            f"frames carry |xi| > pi/(2 tau) = {limit:.6g} (relative mass {leaked / scale_:.3e})"
        )


def bourgain_norm(
    seq: SpacetimeSequence,
    s: float,
    b: float,
    variant: WeightVariant = WeightVariant.LITERAL,
) -> float:
    """Weighted L^2 of the spacetime transform: (sum w^2 |F|^2 dsigma dk^d)^(1/2)."""
    check_support(seq)
    weights = bourgain_weights(seq, s, b, variant)
    transform = spacetime_transform(seq)
    return math.sqrt(float(np.sum(weights**2 * np.abs(transform) ** 2)) * _spacing(seq))


# ─── Modulation cutoffs ────────────────────────────────────────────────────────


def sharp_band(values: NDArray[np.generic], band: int) -> NDArray[np.bool_]:
    """Indicator of [0, 1] for band 0 and (2^(band-1), 2^band] otherwise."""
    if band < 0:
        raise ValueError(f"band index must be >= 0, got {band}")
    values = np.asarray(values)
    if band == 0:
        return values <= 1.0
    return (values > 2.0 ** (band - 1)) & (values <= 2.0**band)


def smooth_band(values: NDArray[np.generic], band: int) -> RealArray:
    """Smooth band: chi for band 0 and chi(2^-band x) - chi(2^(1-band) x) otherwise."""
    if band < 0:
        raise ValueError(f"band index must be >= 0, got {band}")
    values = np.asarray(values, dtype=np.float64)
    if band == 0:
        return chi(values)
    return chi(values / 2.0**band) - chi(values / 2.0 ** (band - 1))


def modulation(seq: SpacetimeSequence) -> RealArray:
    """||sigma| - |xi|| broadcast against the sequence."""
    sigma, xi = _broadcast(seq)
    return np.abs(sigma - xi)


def modulation_cutoff(seq: SpacetimeSequence, band: int, sharp: bool = True) -> SpacetimeSequence:
    """Q_band: restrict the spacetime spectrum to one dyadic modulation band."""
    mod = modulation(seq)
    mask = sharp_band(mod, band).astype(np.float64) if sharp else smooth_band(mod, band)
    transform = spacetime_transform(seq) * mask
    return inverse_spacetime_transform(transform, seq.tau, seq.grid)


def modulation_depth(seq: SpacetimeSequence) -> int:
    """Smallest L with every lattice modulation inside bands 0..L."""
    top = float(np.max(modulation(seq)))
    return 0 if top <= 1.0 else math.ceil(math.log2(top))


# ─── Exact identities ──────────────────────────────────────────────────────────


def box_symbol_check(seq: SpacetimeSequence, tau: float | None = None) -> float:
    """Relative max deviation between the periodic box stencil and its symbol.

    F(box u) = (|xi| + i d(-sigma)) (|xi| - i d(-sigma)) F(u) = (|xi|^2 + d(-sigma)^2) F(u).
    """
    tau = seq.tau if tau is None else tau
    if seq.window < 3:
        raise ValueError(f"box stencil needs a window of at least 3 frames, got {seq.window}")
    lead = len(seq.leading)
    k2 = (wavenumber_magnitude(seq.grid) ** 2).reshape((1,) + (1,) * lead + seq.grid.shape)
    c = seq.coeffs
    stencil = (c - 2.0 * np.roll(c, 1, axis=0) + np.roll(c, 2, axis=0)) / tau**2 + k2 * c
    lhs = spacetime_transform(seq.with_coeffs(stencil))
    sigma = sigma_lattice(seq.window, tau).reshape((seq.window,) + (1,) * (lead + seq.grid.dim))
    xi = np.sqrt(k2)
    d_minus = dtau(-sigma, tau)
    rhs = (xi + 1j * d_minus) * (xi - 1j * d_minus) * spacetime_transform(seq)
    scale_ = float(np.max(np.abs(rhs))) if rhs.size else 0.0
    if scale_ == 0.0:
        return float(np.max(np.abs(lhs))) if lhs.size else 0.0
    return float(np.max(np.abs(lhs - rhs)) / scale_)


def bernstein_bound(seq: SpacetimeSequence, band_mask: NDArray[np.bool_]) -> tuple[float, float]:
    """Return (sup_n ||u_n||^2, C/(M tau) ||u||^2_{l^2 L^2}) for data supported on band_mask.

    C is the largest number of sigma-lattice points of the mask at one spatial frequency.
    """
    counts = band_mask.reshape(seq.window, -1).sum(axis=0)
    cardinality = int(counts.max()) if counts.size else 0
    volume = seq.grid.period**seq.grid.dim
    frame_mass = np.sum(np.abs(seq.coeffs) ** 2, axis=tuple(range(1, seq.coeffs.ndim))) * volume
    total = seq.tau * float(frame_mass.sum())
    return float(frame_mass.max()), cardinality / (seq.window * seq.tau) * total


# ─── Monitors ──────────────────────────────────────────────────────────────────


def strichartz_gamma(dim: int, p: float, q: float) -> float:
    """gamma = d/2 - 1/p - d/q."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return dim / 2.0 - inv_p - dim / q


def check_admissible(p: float, q: float) -> None:
    """2 < p <= inf, 2 <= q < inf, 1/p + 1/q <= 1/2."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    if not (p > 2.0 and 2.0 <= q < math.inf and inv_p + 1.0 / q <= 0.5 + 1e-15):
        raise InadmissibleExponentsError(
            f"(p, q) = ({p}, {q}) is not admissible: need 2 < p <= inf, 2 <= q < inf, "
            "1/p + 1/q <= 1/2"
        )


def _lp_q_norm(samples: NDArray[np.generic], q: float, cell: float) -> float:
    return float((np.sum(np.abs(samples) ** q) * cell) ** (1.0 / q))


def _homogeneous_norm(f: ScalarField, gamma: float) -> float:
    k = wavenumber_magnitude(f.grid)
    weight = np.where(k > 0, k, 1.0) ** (2.0 * gamma)
    total = float(np.sum(np.where(k > 0, weight, 0.0) * np.abs(f.coeffs) ** 2))
    return math.sqrt(f.grid.period**f.grid.dim * total)


def strichartz_ratio(f: ScalarField, p: float, q: float, tau: float, sign: int = 1) -> float:
    """||e^{+-i n tau |D|} f||_{l^p_tau L^q} over n tau in [0, 1] divided by ||f||_{H-dot^gamma}."""
    gamma = strichartz_gamma(f.grid.dim, p, q)
    frames = int(math.floor(1.0 / tau + 1e-12)) + 1
    cell = f.grid.dx**f.grid.dim
    norms = np.empty(frames)
    for n in range(frames):
        samples = to_physical(half_wave(f, n * tau, sign))
        norms[n] = _lp_q_norm(samples, q, cell)
    time_norm = float(norms.max()) if math.isinf(p) else float((tau * np.sum(norms**p)) ** (1 / p))
    return time_norm / _homogeneous_norm(f, gamma)


def single_mode_strichartz_ratio(
    grid: GridSpec, k0: float, p: float, q: float, tau: float
) -> float:
    """Closed form of strichartz_ratio for one plane wave of wavenumber |k0|."""
    d = grid.dim
    gamma = strichartz_gamma(d, p, q)
    frames = int(math.floor(1.0 / tau + 1e-12)) + 1
    time_factor = 1.0 if math.isinf(p) else (tau * frames) ** (1.0 / p)
    return time_factor * grid.period ** (d / q - d / 2.0) * abs(k0) ** (-gamma)


def random_block(grid: GridSpec, k: int, rng: np.random.Generator) -> ScalarField:
    """Random complex data localized by P_k, zero mean."""
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    noise[(0,) * grid.dim] = 0.0
    return apply_multiplier(ScalarField(grid, noise, real=False), lp_symbol(grid, k))


def strichartz_monitor(
    p: float,
    q: float,
    k: int,
    trials: int,
    taus: list[float],
    grid: GridSpec,
    seed: int = 0,
    spread_limit: float = 2.0,
) -> StrichartzReport:
    """Ratio statistics of the discrete Strichartz estimate over random P_k data and a ladder."""
    check_admissible(p, q)
    if not taus:
        raise ValueError("strichartz monitor needs at least one step size")
    rng = np.random.default_rng(seed)
    data = [random_block(grid, k, rng) for _ in range(trials)]
    rows: list[StrichartzRow] = []
    for tau in taus:
        ratios = np.array([strichartz_ratio(f, p, q, tau) for f in data])
        rows.append(
            StrichartzRow(
                tau=tau,
                frames=int(math.floor(1.0 / tau + 1e-12)) + 1,
                max_ratio=float(ratios.max()),
                median_ratio=float(np.median(ratios)),
            )
        )
    maxima = [row.max_ratio for row in rows]
    spread = max(maxima) / min(maxima)
    logger.info("Strichartz (p=%g, q=%g, k=%d): spread %.3f over %d steps", p, q, k, spread,
                len(taus))
    return StrichartzReport(
        p=p,
        q=q,
        k=k,
        gamma=strichartz_gamma(grid.dim, p, q),
        trials=trials,
        seed=seed,
        rows=rows,
        spread=spread,
        bounded=spread < spread_limit,
        status=CheckStatus.MONITORED,
    )


def free_flow_defect(
    state: StatePair,
    taus: list[float],
    s: float,
    s1: float,
    samples: int = 5,
) -> MonitorReport:
    """max_{|t| < tau} ||P(L_t - I)u||_{H^s1 x H^(s1-1)} / (tau^(s-s1) ||u||_{H^s x H^(s-1)}).

    P restricts to |xi| <= pi/(2 tau).
    """
    ratios: list[float] = []
    k = wavenumber_magnitude(state.grid)
    full = sobolev_norm(state.u, s) + sobolev_norm(state.v, s - 1.0)
    for tau in taus:
        keep = (k <= np.pi / (2.0 * tau)).astype(np.float64)
        worst = 0.0
        for t in np.linspace(-tau, tau, 2 * samples + 1)[1:-1]:
            moved = free_evolution(state, float(t))
            du = apply_multiplier(moved.u - state.u, keep)
            dv = apply_multiplier(moved.v - state.v, keep)
            worst = max(worst, sobolev_norm(du, s1) + sobolev_norm(dv, s1 - 1.0))
        ratios.append(worst / (tau ** (s - s1) * full) if full > 0 else 0.0)
    spread = max(ratios) / min(ratios) if ratios and min(ratios) > 0 else 1.0
    return MonitorReport(name="free-flow-defect", ratios=ratios, taus=list(taus), spread=spread)
