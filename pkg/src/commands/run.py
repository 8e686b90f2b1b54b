"""`run`: one filtered Lie splitting evolution with a snapshot schedule."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from src.commands.common import execute, load_experiment, write_json
from src.config import get_settings
from src.exceptions import BlowUpError
from src.models import RowStatus, RunManifest
from src.services.refsol import build_initial_state
from src.services.snapshots import write_state
from src.services.spectral import filter_stats
from src.services.timestepper import evolve

logger = logging.getLogger(__name__)


def _schedule(n_steps: int, every: int) -> list[int]:
    steps = list(range(0, n_steps + 1, every)) if every else []
    if n_steps not in steps:
        steps.append(n_steps)
    return steps


def _run(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config, args.set)
    params = cfg.scheme_params()
    out = Path(args.out)
    write_json(out / "config.json", cfg)
    seed = cfg.data.seed if cfg.data.seed is not None else get_settings().seed
    logger.info(
        "Run: %s data on %d^%d grid, tau=%.6g, %d steps",
        cfg.data.source.value,
        cfg.grid.n_per_axis,
        cfg.grid.dim,
        params.tau,
        params.n_steps,
    )

    s0 = build_initial_state(cfg.data, cfg.grid)
    manifest = RunManifest(
        code_version=get_settings().app_version,
        params=params,
        data=cfg.data,
        seed=seed,
        status=RowStatus.OK,
        steps=0,
        wall_ms=0.0,
        final_time=0.0,
        filter_stats=filter_stats(cfg.grid, params.tau, params.filter_constant),
    )
    try:
        trajectory = evolve(
            s0, params, snapshot_steps=_schedule(params.n_steps, cfg.scheme.snapshot_every)
        )
    except BlowUpError as exc:
        write_json(
            out / "manifest.json",
            manifest.model_copy(
                update={
                    "status": RowStatus.BLOWUP,
                    "steps": exc.step,
                    "final_time": exc.step * params.tau,
                    "failed_step": exc.step,
                }
            ),
        )
        raise

    files = [
        write_state(out / "snapshots" / f"state_{step:06d}.csv", state).relative_to(out)
        for step, state in sorted(trajectory.snapshots.items())
    ]
    write_json(
        out / "manifest.json",
        manifest.model_copy(
            update={
                "steps": trajectory.steps,
                "wall_ms": trajectory.wall_ms,
                "final_time": trajectory.final.time,
                "final_sphere_deviation": trajectory.deviation[-1][1],
                "deviation_series": trajectory.deviation,
                "snapshots": [str(path) for path in files],
            }
        ),
    )
    logger.info("Run finished: %d snapshots in %s", len(files), out)
    return 0


def handle(args: argparse.Namespace) -> int:
    return execute("run", _run, args)


def register(subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
             parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "run", parents=[parent], help="single evolution with snapshots and a manifest"
    )
    parser.set_defaults(handler=handle)
