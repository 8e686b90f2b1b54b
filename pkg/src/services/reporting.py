"""Convergence report emission: CSV tables, fit summary, JSON echo and SVG log-log plots."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from io import StringIO
from pathlib import Path

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from src.config import get_settings
from src.exceptions import ReportWriteError
from src.models import ConvergenceReport, ConvergenceRow, NormReport

logger = logging.getLogger(__name__)

CSV_HEADER = "tau,err_u,err_v,err_total,sphere_dev,steps,wall_ms,status"
FIT_HEADER = "s_u,s_v,rate,residual,points"


def _num(value: float) -> str:
    return f"{value:.17g}"


def format_row(row: ConvergenceRow, deterministic: bool = True) -> str:
    wall = 0.0 if deterministic else row.wall_ms
    return ",".join(
        [
            _num(row.tau),
            _num(row.err_u),
            _num(row.err_v),
            _num(row.err_total),
            _num(row.sphere_dev),
            str(row.steps),
            _num(wall),
            row.status.value,
        ]
    )


def render_csv(rows: Iterable[ConvergenceRow], deterministic: bool = True) -> str:
    lines = [CSV_HEADER, *(format_row(row, deterministic) for row in rows)]
    return "\n".join(lines) + "\n"


def render_fit_csv(report: ConvergenceReport) -> str:
    lines = [FIT_HEADER]
    for norm_report in report.norms:
        fit = norm_report.fit
        rate, residual, points = (fit.rate, fit.residual, fit.points) if fit else (
            math.nan, math.nan, 0)
        lines.append(
            f"{_num(norm_report.norm.s_u)},{_num(norm_report.norm.v_order)},"
            f"{_num(rate)},{_num(residual)},{points}"
        )
    return "\n".join(lines) + "\n"


def _stem(index: int, norm_report: NormReport) -> str:
    return "convergence" if index == 0 else f"convergence_{norm_report.norm.label}"


def render_svg(norm_report: NormReport) -> str:
    """Standalone log-log plot: one marker per finite row, one fitted line."""
    points = [
        (row.tau, row.err_total)
        for row in norm_report.rows
        if math.isfinite(row.err_total) and row.err_total > 0
    ]
    fig = Figure(figsize=(6, 4.5))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot()
    for index, (tau, error) in enumerate(points):
        ax.plot([tau], [error], "o", color="tab:blue", gid=f"error-{index}")
    fit = norm_report.fit
    if fit is not None and points:
        taus = [tau for tau, _ in points]
        errors = [error for _, error in points]
        # anchor the line at the geometric mean of the data
        log_tau = sum(math.log2(t) for t in taus) / len(taus)
        log_err = sum(math.log2(e) for e in errors) / len(errors)
        ends = [min(taus), max(taus)]
        line = [2.0 ** (log_err + fit.rate * (math.log2(t) - log_tau)) for t in ends]
        ax.plot(ends, line, "--", color="tab:gray", gid="fit")
        ax.set_title(f"fitted rate {fit.rate:.3f}")
    if points:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
    norm = norm_report.norm
    ax.set_xlabel("tau")
    ax.set_ylabel(f"error in H^{norm.s_u:g} x H^{norm.v_order:g}")
    ax.grid(True, which="both", alpha=0.3)

    buffer = StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "wavemaps", "svg.fonttype": "path"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc
    return path


def emit_report(
    report: ConvergenceReport,
    out_dir: Path,
    formats: Iterable[str] = ("csv",),
) -> list[Path]:
    """Write CSVs (always), fit.csv, report.json, and SVG plots when requested."""
    wanted = set(formats) | {"csv"}
    deterministic = get_settings().deterministic_reports
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportWriteError(f"cannot create {out_dir}: {exc}") from exc

    written: list[Path] = []
    norms = report.norms or [NormReport(norm=report.config.norms[0])]
    for index, norm_report in enumerate(norms):
        stem = _stem(index, norm_report)
        written.append(_write(out_dir / f"{stem}.csv", render_csv(norm_report.rows,
                                                                   deterministic)))
        if "svg" in wanted:
            written.append(_write(out_dir / f"{stem}.svg", render_svg(norm_report)))
    written.append(_write(out_dir / "fit.csv", render_fit_csv(report)))

    echo = report
    if deterministic:
        echo = report.model_copy(
            update={
                "norms": [
                    nr.model_copy(
                        update={"rows": [r.model_copy(update={"wall_ms": 0.0}) for r in nr.rows]}
                    )
                    for nr in report.norms
                ]
            }
        )
    written.append(_write(out_dir / "report.json", echo.model_dump_json(indent=2) + "\n"))
    logger.info("Report written to %s (%d files)", out_dir, len(written))
    return written
