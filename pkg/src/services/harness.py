"""Convergence studies: tau ladders against a reference solution, rate fitting."""

from __future__ import annotations

import asyncio
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.config import get_settings
from src.exceptions import BlowUpError, InsufficientDataError, NonFiniteError
from src.models import (
    ConvergenceReport,
    ConvergenceRow,
    NormPair,
    NormReport,
    RateFit,
    ReferenceKind,
    RowStatus,
    StudyConfig,
)
from src.services.oracle import rk4_oracle
from src.services.propagator import StatePair
from src.services.refsol import build_initial_state, exact_state
from src.services.spectral import filter_stats, sobolev_norm
from src.services.timestepper import Trajectory, evolve

logger = logging.getLogger(__name__)


@dataclass
class LadderPoint:
    """Outcome of one evolution in a ladder."""

    tau: float
    trajectory: Trajectory | None
    failed_step: int | None = None


# ─── Rate fitting ──────────────────────────────────────────────────────────────


def fit_rate(pairs: Sequence[tuple[float, float]]) -> RateFit:
    """Least-squares slope of log2(error) against log2(tau); residual is the max deviation."""
    usable: list[tuple[float, float]] = []
    for tau, error in pairs:
        if tau > 0 and math.isfinite(error) and error > 0:
            usable.append((tau, error))
        else:
            logger.warning("Excluding (tau=%.6g, error=%.6g) from the rate fit", tau, error)
    if len(usable) < 2:
        raise InsufficientDataError(f"rate fit needs >= 2 positive errors, got {len(usable)}")
    x = np.log2([tau for tau, _ in usable])
    y = np.log2([error for _, error in usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(rate=float(slope), residual=residual, points=len(usable))


# ─── Ladder ────────────────────────────────────────────────────────────────────


def _row(point: LadderPoint, reference: StatePair, norm: NormPair) -> ConvergenceRow:
    if point.trajectory is None:
        nan = float("nan")
        return ConvergenceRow(
            tau=point.tau,
            err_u=nan,
            err_v=nan,
            err_total=nan,
            sphere_dev=nan,
            steps=point.failed_step or 0,
            wall_ms=0.0,
            status=RowStatus.BLOWUP,
        )
    final = point.trajectory.final
    err_u = sobolev_norm(final.u - reference.u, norm.s_u)
    err_v = sobolev_norm(final.v - reference.v, norm.v_order)
    return ConvergenceRow(
        tau=point.tau,
        err_u=err_u,
        err_v=err_v,
        err_total=err_u + err_v,
        sphere_dev=point.trajectory.deviation[-1][1],
        steps=point.trajectory.steps,
        wall_ms=point.trajectory.wall_ms,
    )


def _fit(cfg: StudyConfig, rows: list[ConvergenceRow]) -> RateFit | None:
    fitted = rows[:-1] if cfg.reference is ReferenceKind.FINEST_TAU else rows
    pairs = [(row.tau, row.err_total) for row in fitted]
    try:
        return fit_rate(pairs)
    except InsufficientDataError as exc:
        logger.warning("No rate fitted: %s", exc)
        return None


# ─── Service ───────────────────────────────────────────────────────────────────


class ConvergenceService:
    """Runs tau ladders against a reference solution and fits convergence rates."""

    def __init__(self, threads: int | None = None) -> None:
        self.threads = max(1, threads if threads is not None else get_settings().threads)

    def run_point(self, cfg: StudyConfig, s0: StatePair, tau: float) -> LadderPoint:
        """Evolve one ladder point; blow-up is recorded, not raised."""
        try:
            trajectory = evolve(s0, cfg.scheme_params(tau))
        except BlowUpError as exc:
            logger.warning(
                "tau=%.6g blew up at step %d; row kept with status blowup", tau, exc.step
            )
            return LadderPoint(tau, None, exc.step)
        return LadderPoint(tau, trajectory)

    async def _run_ladder(self, cfg: StudyConfig, s0: StatePair) -> list[LadderPoint]:
        limit = asyncio.Semaphore(self.threads)

        async def job(tau: float) -> LadderPoint:
            async with limit:
                return await asyncio.to_thread(self.run_point, cfg, s0, tau)

        return list(await asyncio.gather(*(job(tau) for tau in cfg.ladder)))

    def reference(
        self, cfg: StudyConfig, s0: StatePair, points: list[LadderPoint]
    ) -> tuple[StatePair, str]:
        """Reference state at t_final and a one-line description of how it was made."""
        if cfg.reference is ReferenceKind.EXACT:
            detail = f"exact solution at t={cfg.t_final:.6g}"
            return exact_state(cfg.data, cfg.grid, cfg.t_final), detail
        if cfg.reference is ReferenceKind.FINEST_TAU:
            finest = points[-1]
            if finest.trajectory is None:
                raise NonFiniteError(f"finest ladder step tau={finest.tau} blew up; no reference")
            return finest.trajectory.final, f"finest ladder point tau={finest.tau:.6g}"
        tau_min = cfg.ladder[-1]
        tau_fine = tau_min / cfg.oracle_refinement
        detail = (
            f"rk4 oracle with step {tau_fine:.6g}, filter at tau={tau_min:.6g} for every "
            f"ladder point (each point filters at its own tau)"
        )
        state = rk4_oracle(s0, tau_fine, cfg.t_final, cfg.filter_constant, tau_filter=tau_min)
        return state, detail

    async def run_study(self, cfg: StudyConfig) -> ConvergenceReport:
        """Run every ladder point concurrently, measure errors in each norm, fit rates."""
        logger.info(
            "Study: %s data, %d ladder points, reference %s, T=%.6g",
            cfg.data.source.value,
            len(cfg.ladder),
            cfg.reference.value,
            cfg.t_final,
        )
        s0 = build_initial_state(cfg.data, cfg.grid)
        points = await self._run_ladder(cfg, s0)
        reference, detail = await asyncio.to_thread(self.reference, cfg, s0, points)
        logger.info("Reference: %s", detail)

        reports: list[NormReport] = []
        for norm in cfg.norms:
            rows = [_row(point, reference, norm) for point in points]
            fit = _fit(cfg, rows)
            if fit is not None:
                logger.info(
                    "H^%g x H^%g: rate %.3f (residual %.3f, %d points)",
                    norm.s_u,
                    norm.v_order,
                    fit.rate,
                    fit.residual,
                    fit.points,
                )
            reports.append(NormReport(norm=norm, rows=rows, fit=fit))

        return ConvergenceReport(
            config=cfg,
            norms=reports,
            reference_detail=detail,
            filter_stats=[
                filter_stats(cfg.grid, tau, cfg.filter_constant) for tau in cfg.ladder
            ],
            code_version=get_settings().app_version,
        )
