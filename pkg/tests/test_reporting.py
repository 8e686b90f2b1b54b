"""Tests for CSV, SVG and JSON report emission."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from src.exceptions import ReportWriteError
from src.models import (
    ConvergenceReport,
    ConvergenceRow,
    GridSpec,
    NormPair,
    NormReport,
    StudyConfig,
)
from src.services.harness import fit_rate
from src.services.reporting import (
    CSV_HEADER,
    FIT_HEADER,
    emit_report,
    format_row,
    render_csv,
    render_svg,
)

LADDER = [2.0**-e for e in range(4, 10)]


def _row(tau: float) -> ConvergenceRow:
    return ConvergenceRow(
        tau=tau,
        err_u=0.75 * tau,
        err_v=0.25 * tau,
        err_total=tau,
        sphere_dev=0.1 * tau,
        steps=round(0.5 / tau),
        wall_ms=12.5,
    )


def _report(norms: list[NormPair] | None = None) -> ConvergenceReport:
    norms = norms or [NormPair(s_u=0.0, s_v=-1.0)]
    cfg = StudyConfig(
        grid=GridSpec(dim=1, n_per_axis=1024, period=20.0),
        ladder=LADDER,
        norms=norms,
        filter_constant=1.0,
    )
    rows = [_row(tau) for tau in LADDER]
    fit = fit_rate([(row.tau, row.err_total) for row in rows])
    return ConvergenceReport(
        config=cfg,
        norms=[NormReport(norm=norm, rows=rows, fit=fit) for norm in norms],
        code_version="test",
    )


def test_empty_table_is_header_only() -> None:
    """No rows still yields the header line."""
    assert render_csv([]) == CSV_HEADER + "\n"


def test_row_format() -> None:
    """Floats carry 17 significant digits and wall time is zeroed when deterministic."""
    row = _row(0.1)
    fields = format_row(row).split(",")
    assert fields[0] == "0.10000000000000001"
    assert fields[5] == "5"
    assert fields[6] == "0"
    assert fields[7] == "ok"
    assert format_row(row, deterministic=False).split(",")[6] == "12.5"


def test_svg_has_one_marker_per_point_and_one_fit() -> None:
    """Six ladder points give six markers and a single fitted line."""
    svg = render_svg(_report().norms[0])
    assert svg.count('id="error-') == 6
    assert svg.count('id="fit"') == 1


def test_svg_without_fit() -> None:
    """No fit, no fitted line."""
    norm_report = _report().norms[0].model_copy(update={"fit": None})
    assert 'id="fit"' not in render_svg(norm_report)


def test_emit_writes_every_file(tmp_path: Path) -> None:
    """CSV per norm, SVG per norm, fit summary and JSON echo."""
    report = _report([NormPair(s_u=0.0, s_v=-1.0), NormPair(s_u=1.6, s_v=0.6)])
    files = emit_report(report, tmp_path / "out", ["csv", "svg"])
    names = sorted(path.name for path in files)
    assert names == [
        "convergence.csv",
        "convergence.svg",
        "convergence_1.6_0.6.csv",
        "convergence_1.6_0.6.svg",
        "fit.csv",
        "report.json",
    ]
    lines = (tmp_path / "out" / "convergence.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    fit_lines = (tmp_path / "out" / "fit.csv").read_text(encoding="utf-8").splitlines()
    assert fit_lines[0] == FIT_HEADER
    assert fit_lines[2].startswith("1.6000000000000001,0.59999999999999998,")
    echo = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
    assert all(row["wall_ms"] == 0.0 for row in echo["norms"][0]["rows"])


def test_emit_is_byte_identical(tmp_path: Path) -> None:
    """Same report, same bytes."""
    report = _report()
    first = emit_report(report, tmp_path / "a", ["csv", "svg"])
    second = emit_report(report, tmp_path / "b", ["csv", "svg"])
    for a, b in zip(first, second, strict=True):
        assert a.name == b.name
        assert a.read_bytes() == b.read_bytes()


def test_unwritable_directory(tmp_path: Path) -> None:
    """Output paths that are files raise ReportWriteError."""
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(ReportWriteError) as excinfo:
        emit_report(_report(), blocker)
    assert excinfo.value.exit_code == 1
