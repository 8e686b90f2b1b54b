"""`diagnostics`: identity, vanishing and Strichartz suites."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from src.commands.common import execute, load_experiment, write_json
from src.services.diagnostics import run_diagnostics

logger = logging.getLogger(__name__)


def _diagnostics(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config, args.set)
    out = Path(args.out)
    write_json(out / "config.json", cfg)
    report = run_diagnostics(cfg.diagnostics)
    write_json(out / "diagnostics.json", report)
    if report.failures:
        logger.error("Failing checks: %s", ", ".join(report.failures))
        return 1
    return 0


def handle(args: argparse.Namespace) -> int:
    return execute("diagnostics", _diagnostics, args)


def register(subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
             parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "diagnostics", parents=[parent], help="exact identities, vanishing checks, monitors"
    )
    parser.set_defaults(handler=handle)
