"""Diagnostics suite: exact identities, vanishing statements and ratio monitors."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy import fft as sfft

from src.config import get_settings
from src.models import (
    CheckResult,
    CheckStatus,
    DiagnosticsConfig,
    DiagnosticsReport,
    GridSpec,
)
from src.services.bourgain import (
    SpacetimeSequence,
    bernstein_bound,
    box_symbol_check,
    dtau,
    free_flow_defect,
    inverse_spacetime_transform,
    l2_norm,
    modulation,
    modulation_cutoff,
    modulation_depth,
    sharp_band,
    spacetime_transform,
    spectral_l2_norm,
    strichartz_monitor,
)
from src.services.propagator import StatePair, free_evolution, mode_energy
from src.services.refsol import GeodesicData, gaussian_theta0, geodesic_state
from src.services.spectral import (
    Field,
    ScalarField,
    chi,
    field_to_spectral,
    l2_norm_physical,
    lp_symbol,
    sobolev_norm,
    to_physical,
    to_spectral,
    wavenumber_magnitude,
)
from src.services.timestepper import History, null_bracket, null_form_expansion
from src.services.vanishing import vanishing_check

logger = logging.getLogger(__name__)


def _relative(difference: float, scale: float) -> float:
    return difference / scale if scale > 0 else difference


def _check(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    status = CheckStatus.PASS if value < tolerance else CheckStatus.FAIL
    log = logger.info if status is CheckStatus.PASS else logger.warning
    log("Check %s: %.3e (tolerance %.1e) %s", name, value, tolerance, status.value)
    return CheckResult(name=name, status=status, value=value, tolerance=tolerance, detail=detail)


# ─── Random test data ──────────────────────────────────────────────────────────


def band_limited_field(
    grid: GridSpec, rng: np.random.Generator, fraction: float = 0.125
) -> Field:
    """Real random map whose modes satisfy |m| <= fraction * N on every axis."""
    samples = rng.standard_normal((3, *grid.shape))
    f = field_to_spectral(samples, grid)
    m = np.abs(sfft.fftfreq(grid.n_per_axis) * grid.n_per_axis)
    keep = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.n_per_axis
        keep &= (m <= fraction * grid.n_per_axis).reshape(shape)
    return Field(grid, np.where(keep, f.coeffs, 0.0), real=True)


def random_sequence(grid: GridSpec, window: int, tau: float, rng: np.random.Generator
                    ) -> SpacetimeSequence:
    coeffs = rng.standard_normal((window, *grid.shape)) + 1j * rng.standard_normal(
        (window, *grid.shape)
    )
    return SpacetimeSequence(tau, grid, coeffs)


# ─── Identity checks ───────────────────────────────────────────────────────────


def spatial_checks(cfg: DiagnosticsConfig, grid: GridSpec, rng: np.random.Generator
                   ) -> list[CheckResult]:
    samples = rng.standard_normal(grid.shape)
    f = to_spectral(samples, grid)
    back = np.asarray(to_physical(f))
    roundtrip = _relative(float(np.max(np.abs(back - samples))), float(np.max(np.abs(samples))))
    physical = l2_norm_physical(f)
    parseval = _relative(abs(physical - sobolev_norm(f, 0.0)), physical)

    xi = wavenumber_magnitude(grid)
    top = max(1, math.ceil(math.log2(float(xi.max()) + 1.0)) + 1)
    blocks = sum((lp_symbol(grid, k) for k in range(top + 1)), np.zeros(grid.shape))
    telescoping = float(np.max(np.abs(blocks - chi(xi / 2.0**top))))
    reconstruction = float(np.max(np.abs(blocks - 1.0)))
    return [
        _check("spatial-roundtrip", roundtrip, cfg.parseval_tolerance),
        _check("spatial-parseval", parseval, cfg.parseval_tolerance),
        _check("lp-telescoping", telescoping, cfg.identity_tolerance),
        _check("lp-reconstruction", reconstruction, cfg.identity_tolerance,
               f"blocks 0..{top}"),
    ]


def spacetime_checks(cfg: DiagnosticsConfig, grid: GridSpec, rng: np.random.Generator
                     ) -> list[CheckResult]:
    seq = random_sequence(grid, cfg.window, cfg.tau, rng)
    physical = l2_norm(seq)
    parseval = _relative(abs(physical - spectral_l2_norm(seq)), physical)
    recovered = inverse_spacetime_transform(spacetime_transform(seq), seq.tau, grid)
    inversion = _relative(
        float(np.max(np.abs(recovered.coeffs - seq.coeffs))), float(np.max(np.abs(seq.coeffs)))
    )

    depth = modulation_depth(seq)
    total = sum(
        (modulation_cutoff(seq, band).coeffs for band in range(depth + 1)),
        np.zeros_like(seq.coeffs),
    )
    partition = _relative(
        float(np.max(np.abs(total - seq.coeffs))), float(np.max(np.abs(seq.coeffs)))
    )
    crossed = modulation_cutoff(modulation_cutoff(seq, 1), 2)
    disjoint = _relative(float(np.max(np.abs(crossed.coeffs))), float(np.max(np.abs(seq.coeffs))))

    samples = np.linspace(-np.pi / (2.0 * cfg.tau), np.pi / (2.0 * cfg.tau), 1000)
    samples = samples[samples != 0.0]
    ratio = np.abs(dtau(samples, cfg.tau)) / np.abs(samples)
    comparability = float(
        max(np.max(2.0 / np.pi - ratio), np.max(ratio - 1.0), 0.0)
    )
    return [
        _check("spacetime-parseval", parseval, cfg.parseval_tolerance),
        _check("spacetime-inversion", inversion, cfg.parseval_tolerance),
        _check("box-symbol", box_symbol_check(seq), cfg.identity_tolerance, f"M={seq.window}"),
        _check("q-partition", partition, cfg.identity_tolerance, f"bands 0..{depth}"),
        _check("q-disjoint", disjoint, cfg.identity_tolerance),
        _check("dtau-comparability", comparability, cfg.identity_tolerance),
        bernstein_check(cfg, seq),
    ]


def bernstein_check(cfg: DiagnosticsConfig, seq: SpacetimeSequence) -> CheckResult:
    """Sharp P_k Q_j data: sup_n frame mass against the lattice-count bound."""
    sigma_mod = modulation(seq)
    xi = wavenumber_magnitude(seq.grid)[np.newaxis]
    mask = sharp_band(sigma_mod, 2) & sharp_band(np.broadcast_to(xi, sigma_mod.shape), 2)
    localized = inverse_spacetime_transform(spacetime_transform(seq) * mask, seq.tau, seq.grid)
    lhs, rhs = bernstein_bound(localized, mask)
    excess = max(0.0, _relative(lhs - rhs, rhs))
    detail = f"sup {lhs:.6g} <= bound {rhs:.6g}"
    return _check("bernstein", excess, cfg.identity_tolerance, detail)


def null_identity_check(cfg: DiagnosticsConfig, grid: GridSpec, rng: np.random.Generator
                        ) -> CheckResult:
    """box(g.h) - g.box h - h.box g against its difference-quotient expansion."""
    g = History(*(band_limited_field(grid, rng) for _ in range(3)))
    h = History(*(band_limited_field(grid, rng) for _ in range(3)))
    lhs = null_bracket(g, h, cfg.tau)
    rhs = null_form_expansion(g, h, cfg.tau)
    deviation = _relative((lhs - rhs).max_abs(), rhs.max_abs())
    return _check("null-identity", deviation, cfg.identity_tolerance)


def free_flow_checks(cfg: DiagnosticsConfig, grid: GridSpec, rng: np.random.Generator
                     ) -> list[CheckResult]:
    state = StatePair(band_limited_field(grid, rng, 0.5), band_limited_field(grid, rng, 0.5))
    t1, t2 = 0.3 * cfg.tau, 1.7 * cfg.tau
    composed = free_evolution(free_evolution(state, t1), t2)
    direct = free_evolution(state, t1 + t2)
    scale = max(direct.u.max_abs(), direct.v.max_abs())
    group = _relative(
        max((composed.u - direct.u).max_abs(), (composed.v - direct.v).max_abs()), scale
    )
    before = mode_energy(state)
    after = mode_energy(free_evolution(state, 5.0 * cfg.tau))
    energy = _relative(float(np.max(np.abs(after - before))), float(np.max(before)))
    return [
        _check("group-law", group, cfg.parseval_tolerance),
        _check("energy-conservation", energy, cfg.parseval_tolerance),
    ]


# ─── Suite ─────────────────────────────────────────────────────────────────────


def run_diagnostics(cfg: DiagnosticsConfig) -> DiagnosticsReport:
    """Run every suite and collect their reports."""
    seed = cfg.seed if cfg.seed is not None else get_settings().seed
    rng = np.random.default_rng(seed)
    grid = GridSpec(dim=1, n_per_axis=cfg.n_per_axis, period=cfg.period)

    suites: list[Callable[[], list[CheckResult]]] = [
        lambda: spatial_checks(cfg, grid, rng),
        lambda: spacetime_checks(cfg, grid, rng),
        lambda: [null_identity_check(cfg, grid, rng)],
        lambda: free_flow_checks(cfg, grid, rng),
    ]
    checks = [result for suite in suites for result in suite()]

    vanishing = [
        vanishing_check(
            case,
            cfg.vanishing_scales.get(case.value),
            trials=cfg.trials,
            seed=seed,
            tolerance=cfg.vanishing_tolerance,
            control_threshold=cfg.control_threshold,
            shell_cap=cfg.shell_cap,
            control_scales=cfg.vanishing_control_scales.get(case.value),
        )
        for case in cfg.vanishing_cases
    ]

    strichartz_grid = GridSpec(dim=1, n_per_axis=cfg.strichartz_n, period=cfg.period)
    strichartz = [
        strichartz_monitor(
            p,
            q,
            cfg.strichartz_k,
            cfg.strichartz_trials,
            cfg.strichartz_ladder,
            strichartz_grid,
            seed=seed,
            spread_limit=cfg.spread_limit,
        )
        for p, q in cfg.strichartz_pairs
    ]

    smooth = geodesic_state(
        GeodesicData(gaussian_theta0(grid), ScalarField.zeros(grid)), 0.0
    )
    monitors = [free_flow_defect(smooth, cfg.strichartz_ladder, s=1.0, s1=0.0)]

    report = DiagnosticsReport(
        seed=seed,
        checks=checks,
        vanishing=vanishing,
        strichartz=strichartz,
        monitors=monitors,
        code_version=get_settings().app_version,
    )
    if report.failures:
        logger.warning("Diagnostics failures: %s", ", ".join(report.failures))
    else:
        logger.info("Diagnostics: %d checks and %d vanishing cases passed", len(checks),
                    len(vanishing))
    return report
