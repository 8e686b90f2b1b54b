"""`convergence`: tau-ladder study and report emission."""

from __future__ import annotations

import argparse
import asyncio
import logging
from pathlib import Path

from src.commands.common import execute, load_experiment, write_json
from src.config import get_settings
from src.models import StudyManifest
from src.services.harness import ConvergenceService
from src.services.reporting import emit_report

logger = logging.getLogger(__name__)


def _convergence(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config, args.set)
    study = cfg.study_config()
    out = Path(args.out)
    write_json(out / "config.json", cfg)

    settings = get_settings()
    report = asyncio.run(ConvergenceService(settings.threads).run_study(study))
    files = emit_report(report, out, cfg.output.formats)
    wall = {
        f"{row.tau:.17g}": row.wall_ms for row in (report.norms[0].rows if report.norms else [])
    }
    write_json(
        out / "manifest.json",
        StudyManifest(
            code_version=settings.app_version,
            seed=study.data.seed if study.data.seed is not None else settings.seed,
            threads=settings.threads,
            files=[str(path.relative_to(out)) for path in files],
            wall_ms=wall,
        ),
    )
    for norm_report in report.norms:
        if norm_report.fit is not None:
            logger.info(
                "rate in H^%g x H^%g: %.3f", norm_report.norm.s_u, norm_report.norm.v_order,
                norm_report.fit.rate,
            )
    return 0


def handle(args: argparse.Namespace) -> int:
    return execute("convergence", _convergence, args)


def register(subparsers: argparse._SubParsersAction[argparse.ArgumentParser],
             parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "convergence", parents=[parent], help="tau-sweep against a reference, rate fit, report"
    )
    parser.set_defaults(handler=handle)
