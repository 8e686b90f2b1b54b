"""wavemaps-splitting command-line entry point.

Filtered Lie splitting for wave maps into the sphere, discrete Bourgain-space
diagnostics and a convergence harness.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence

from src.commands import convergence, diagnostics, run, synth
from src.config import get_settings

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="experiment file (TOML or JSON dump) or preset name")
    parent.add_argument("--out", default="out", help="output directory")
    parent.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted override applied after the file, e.g. scheme.tau=0.0078125",
    )
    parent.add_argument("--threads", type=int, help="FFT workers and ladder concurrency")
    parent.add_argument("--seed", type=int, help="default seed for random data and trials")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemaps",
        description="Filtered Lie splitting for wave maps: runs, convergence studies, "
        "diagnostics and datasets.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = _common_options()
    for command in (run, convergence, diagnostics, synth):
        command.register(subparsers, parent)
    return parser


def _apply_process_overrides(args: argparse.Namespace) -> None:
    if args.threads is not None:
        os.environ["WAVEMAPS_THREADS"] = str(args.threads)
    if args.seed is not None:
        os.environ["WAVEMAPS_SEED"] = str(args.seed)
    get_settings.cache_clear()


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and dispatch to a subcommand."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _apply_process_overrides(args)
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    logger.info("%s %s: %s", settings.app_name, settings.app_version, args.command)
    code: int = args.handler(args)
    return code


if __name__ == "__main__":
    sys.exit(main())
