"""End-to-end tests of the wavemaps command line."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from src.main import main
from src.services.refsol import constant_map_state
from src.services.snapshots import read_spectrum, read_state
from src.services.timestepper import sphere_deviation

QUICK_DIAGNOSTICS = [
    "--config",
    "diagnostics",
    "--set",
    'diagnostics.vanishing_cases=["geom4"]',
    "--set",
    "diagnostics.trials=2",
    "--set",
    "diagnostics.strichartz_trials=2",
]


def test_unknown_command_is_usage_error() -> None:
    """Argument errors exit with 2."""
    assert main(["frobnicate"]) == 2


def test_unknown_preset_is_configuration_error(tmp_path: Path) -> None:
    """A missing config file exits with 2."""
    assert main(["run", "--config", "no-such-preset", "--out", str(tmp_path)]) == 2


def test_run_rejects_early_activation(tmp_path: Path) -> None:
    """The nonlinearity needs two levels of history: activation_steps < 2 exits with 2."""
    code = main(
        ["run", "--config", "constant-map", "--set", "scheme.activation_steps=1",
         "--out", str(tmp_path)]
    )
    assert code == 2
    assert not (tmp_path / "manifest.json").exists()


def test_run_fig1_ten_steps(tmp_path: Path) -> None:
    """fig1 preset for ten steps writes both snapshots and a manifest."""
    code = main(
        ["run", "--config", "fig1-1d", "--set", "scheme.t_end=0.0390625", "--out", str(tmp_path)]
    )
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["steps"] == 10
    assert manifest["status"] == "ok"
    assert manifest["snapshots"] == ["snapshots/state_000000.csv", "snapshots/state_000010.csv"]
    final = read_state(tmp_path / "snapshots" / "state_000010.csv")
    assert math.isclose(final.time, 0.0390625)
    assert sphere_deviation(final) < 0.1


def test_run_constant_map_stays_fixed(tmp_path: Path) -> None:
    """The constant-map preset ends where it started."""
    assert main(["run", "--config", "constant-map", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["snapshots"] == ["snapshots/state_000064.csv"]
    last = read_state(tmp_path / manifest["snapshots"][-1])
    expected = constant_map_state(last.grid, [0.0, 0.0, 1.0])
    assert (last.u - expected.u).max_abs() < 1e-12
    assert last.v.max_abs() < 1e-12


def test_synth_rough_spectrum(tmp_path: Path) -> None:
    """Rough data: the k = 0 coefficient is 1/log 2."""
    code = main(
        [
            "synth",
            "--set",
            "data.source=geodesic-rough",
            "--set",
            "data.s=1.7",
            "--set",
            "grid.n_per_axis=128",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    spectrum = read_spectrum(tmp_path / "theta0_spectrum.csv")
    assert spectrum.coeffs[0] == 1.0 / math.log(2.0)
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["files"] == ["initial_state.csv", "theta0_spectrum.csv"]


def test_synth_fig1_is_unit_length_and_repeatable(tmp_path: Path) -> None:
    """fig1 samples lie on the sphere and re-synthesis is byte-identical."""
    args = ["synth", "--config", "fig1-1d"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    state = read_state(tmp_path / "a" / "initial_state.csv")
    assert sphere_deviation(state) < 1e-12
    for name in ("initial_state.csv", "manifest.json", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_dump_pins_settings_seed(tmp_path: Path) -> None:
    """A dump taken under --seed replays identically under another seed."""
    args = ["synth", "--set", "data.source=geodesic-rough", "--set", "data.random_phases=true",
            "--set", "grid.n_per_axis=128"]
    first = tmp_path / "first"
    assert main([*args, "--seed", "5", "--out", str(first)]) == 0
    dump = json.loads((first / "config.json").read_text(encoding="utf-8"))
    assert dump["data"]["seed"] == 5
    assert dump["diagnostics"]["seed"] == 5
    replay = tmp_path / "replay"
    assert main(["synth", "--config", str(first / "config.json"), "--seed", "6", "--out",
                 str(replay)]) == 0
    for name in ("initial_state.csv", "theta0_spectrum.csv"):
        assert (first / name).read_bytes() == (replay / name).read_bytes()


def test_convergence_bad_ladder(tmp_path: Path) -> None:
    """A step that does not divide t_final is a configuration error."""
    code = main(
        ["convergence", "--config", "constant-map", "--set", "study.ladder=[0.3]",
         "--out", str(tmp_path)]
    )
    assert code == 2


def test_convergence_replays_from_config_dump(tmp_path: Path) -> None:
    """The config.json of a study reproduces its CSV byte for byte."""
    first = tmp_path / "first"
    assert main(["convergence", "--config", "constant-map", "--out", str(first)]) == 0
    lines = (first / "convergence.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4
    replay = tmp_path / "replay"
    assert main(["convergence", "--config", str(first / "config.json"), "--out",
                 str(replay)]) == 0
    assert (first / "convergence.csv").read_bytes() == (replay / "convergence.csv").read_bytes()
    manifest = json.loads((first / "manifest.json").read_text(encoding="utf-8"))
    assert "convergence.csv" in manifest["files"]


def test_quick_diagnostics_pass(tmp_path: Path) -> None:
    """Identity checks, one vanishing case and the monitors pass."""
    assert main(["diagnostics", *QUICK_DIAGNOSTICS, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "diagnostics.json").read_text(encoding="utf-8"))
    names = {check["name"] for check in report["checks"]}
    assert {"null-identity", "box-symbol", "bernstein", "q-partition"} <= names
    assert report["vanishing"][0]["status"] == "pass"
    assert report["vanishing"][0]["control_status"] == "expected-fail"
    assert [s["status"] for s in report["strichartz"]] == ["monitored", "monitored"]


def test_forced_diagnostics_failure(tmp_path: Path) -> None:
    """A zero tolerance fails every identity check and exits with 1."""
    code = main(
        [
            "diagnostics",
            *QUICK_DIAGNOSTICS,
            "--set",
            "diagnostics.identity_tolerance=0",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 1
    report = json.loads((tmp_path / "diagnostics.json").read_text(encoding="utf-8"))
    failed = [c["name"] for c in report["checks"] if c["status"] == "fail"]
    assert "null-identity" in failed


def test_threads_and_seed_flags(tmp_path: Path) -> None:
    """--threads and --seed reach the settings and the manifest."""
    code = main(
        ["synth", "--set", "grid.n_per_axis=128", "--seed", "9", "--threads", "2",
         "--out", str(tmp_path)]
    )
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 9
    state = read_state(tmp_path / "initial_state.csv")
    assert np.isfinite(state.u.coeffs).all()


@pytest.mark.slow
def test_full_diagnostics_suite(tmp_path: Path) -> None:
    """Default diagnostics preset: every case passes."""
    assert main(["diagnostics", "--config", "diagnostics", "--out", str(tmp_path)]) == 0
