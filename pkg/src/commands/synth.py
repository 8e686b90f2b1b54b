"""`synth`: materialize initial datasets."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from src.commands.common import execute, load_experiment, write_json
from src.config import get_settings
from src.models import SynthManifest
from src.services.refsol import build_initial_state, geodesic_data_for
from src.services.snapshots import write_spectrum, write_state
from src.services.timestepper import sphere_deviation

logger = logging.getLogger(__name__)


def _synth(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config, args.set)
    out = Path(args.out)
    write_json(out / "config.json", cfg)

    state = build_initial_state(cfg.data, cfg.grid)
    files = [write_state(out / "initial_state.csv", state)]
    if cfg.data.is_geodesic:
        theta = geodesic_data_for(cfg.data, cfg.grid).theta0
        files.append(write_spectrum(out / "theta0_spectrum.csv", theta))
    deviation = sphere_deviation(state)
    settings = get_settings()
    write_json(
        out / "manifest.json",
        SynthManifest(
            code_version=settings.app_version,
            grid=cfg.grid,
            data=cfg.data,
            seed=cfg.data.seed if cfg.data.seed is not None else settings.seed,
            files=[str(path.relative_to(out)) for path in files],
            sphere_deviation=deviation,
        ),
    )
    logger.info("Synthesized %s data (sphere deviation %.3e)", cfg.data.source.value, deviation)
    return 0


def handle(args: argparse.Namespace) -> int:
    return execute("synth", _synth, args)


def register(subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
             parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "synth", parents=[parent], help="write initial data and spectra to files"
    )
    parser.set_defaults(handler=handle)
