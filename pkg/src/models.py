"""Pydantic models for wavemaps-splitting: grids, scheme and study parameters, reports."""

from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import get_settings

# Complex128 buffers alive per grid during one evolution (state, history ring, scratch).
FIELD_BUFFERS = 48


# ─── Enums ─────────────────────────────────────────────────────────────────────


class DataSource(str, Enum):
    """Initial data generators."""

    GEODESIC_SMOOTH = "geodesic-smooth"
    GEODESIC_ROUGH = "geodesic-rough"
    FIG1_1D = "fig1-1d"
    CONSTANT_MAP = "constant-map"
    CUSTOM_FILE = "custom-file"


class ReferenceKind(str, Enum):
    """Reference solution a convergence study compares against."""

    EXACT = "exact"
    FINEST_TAU = "finest-tau"
    RK4_ORACLE = "rk4-oracle"


class FilterPlacement(str, Enum):
    """Where the frequency filter is applied inside the discrete nonlinearity."""

    LITERAL = "literal"
    OUTPUT_ONLY = "output-only"


class WeightVariant(str, Enum):
    """Bourgain weight in the spatial-frequency slot."""

    LITERAL = "literal"
    SURROGATE = "surrogate"


class VanishingCase(str, Enum):
    """Modulation vanishing statements checked on the discrete lattice."""

    GEOM4 = "geom4"
    GEOM5 = "geom5"
    CLAIM2 = "claim2"
    CLAIM1 = "claim1"
    CLAIM3 = "claim3"
    CLAIM4 = "claim4"


class RowStatus(str, Enum):
    """Outcome of one ladder point."""

    OK = "ok"
    BLOWUP = "blowup"


class CheckStatus(str, Enum):
    """Outcome of one diagnostics check."""

    PASS = "pass"
    FAIL = "fail"
    EXPECTED_FAIL = "expected-fail"
    CONTROL_FAILED = "control-failed"
    MONITORED = "monitored"


class _Model(BaseModel):
    """Strict base: unknown keys are errors, inf/nan survive JSON round trips."""

    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")


# ─── Grid ──────────────────────────────────────────────────────────────────────


class GridSpec(_Model):
    """Periodic torus lattice [-L/2, L/2)^dim with N points per axis."""

    model_config = ConfigDict(extra="forbid", frozen=True, ser_json_inf_nan="constants")

    dim: int = Field(1, ge=1, le=3, description="Spatial dimension")
    n_per_axis: int = Field(1024, ge=2, description="Points per axis (power of two)")
    period: float = Field(20.0, gt=0, description="Torus side length L")

    @field_validator("n_per_axis")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"n_per_axis must be a power of two, got {value}")
        return value

    @model_validator(mode="after")
    def _fits_memory(self) -> GridSpec:
        budget = get_settings().memory_budget_mb * 1024 * 1024
        needed = self.estimated_bytes()
        if needed > budget:
            raise ValueError(
                f"grid {self.n_per_axis}^{self.dim} needs ~{needed / 2**20:.0f} MiB, "
                f"memory budget is {budget / 2**20:.0f} MiB"
            )
        return self

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def dx(self) -> float:
        return self.period / self.n_per_axis

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def k_nyquist(self) -> float:
        return self.dk * self.n_per_axis / 2

    def estimated_bytes(self, buffers: int = FIELD_BUFFERS) -> int:
        return self.size * 16 * buffers


def filter_margin_violation(grid: GridSpec, tau: float, filter_constant: float) -> str | None:
    """Describe a filter/Nyquist conflict, or None when the cutoff sits below 2/3 Nyquist."""
    cutoff = 1.0 / (filter_constant * math.sqrt(tau))
    limit = (2.0 / 3.0) * grid.k_nyquist
    if cutoff > limit:
        return (
            f"filter cutoff (c*tau^(1/2))^-1 = {cutoff:.6g} exceeds (2/3) Nyquist = {limit:.6g} "
            f"(tau={tau:.6g}, c={filter_constant:.6g}, N={grid.n_per_axis}, L={grid.period:.6g})"
        )
    return None


def steps_for(t_final: float, tau: float) -> int | None:
    """Number of steps if tau divides t_final exactly, else None."""
    ratio = t_final / tau
    steps = round(ratio)
    if abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        return None
    return steps


# ─── Scheme ────────────────────────────────────────────────────────────────────


class SchemeParams(_Model):
    """Parameters of one filtered Lie splitting run."""

    grid: GridSpec
    tau: float = Field(..., gt=0, lt=1, description="Time step")
    t_end: float = Field(..., ge=0, description="Final time, integer multiple of tau")
    filter_constant: float = Field(100.0, gt=0, description="c in chi(c tau^(1/2) |k|)")
    activation_steps: int = Field(2, ge=2, description="Free-flight steps before the nonlinearity")
    filter_placement: FilterPlacement = Field(FilterPlacement.LITERAL)

    @model_validator(mode="after")
    def _check(self) -> SchemeParams:
        if steps_for(self.t_end, self.tau) is None:
            raise ValueError(f"t_end={self.t_end} is not an integer multiple of tau={self.tau}")
        problem = filter_margin_violation(self.grid, self.tau, self.filter_constant)
        if problem:
            raise ValueError(problem)
        return self

    @property
    def n_steps(self) -> int:
        return steps_for(self.t_end, self.tau) or 0


class FilterStats(_Model):
    """Mode counts of the frequency filter at one step size."""

    tau: float
    filter_constant: float
    retained: int = Field(..., description="Modes with chi == 1")
    attenuated: int = Field(..., description="Modes with 0 < chi < 1")
    annihilated: int = Field(..., description="Modes with chi == 0")


# ─── Data ──────────────────────────────────────────────────────────────────────


class DataConfig(_Model):
    """Initial data selection."""

    source: DataSource = DataSource.GEODESIC_SMOOTH
    s: float = Field(1.7, description="Regularity of rough geodesic data")
    amplitude: float = Field(1.0, description="Gaussian angle amplitude (smooth data)")
    width: float = Field(1.0, gt=0, description="Gaussian angle width (smooth data)")
    random_phases: bool = Field(False, description="Random phases for the rough spectrum")
    seed: int | None = Field(None, description="Seed for random phases (falls back to settings)")
    path: str | None = Field(None, description="Snapshot file for custom-file data")
    constant: list[float] = Field(
        default_factory=lambda: [0.0, 0.0, 1.0], min_length=3, max_length=3
    )

    @model_validator(mode="after")
    def _check(self) -> DataConfig:
        if self.source is DataSource.GEODESIC_ROUGH and self.s <= 0:
            raise ValueError(f"rough data needs s > 0, got {self.s}")
        if self.source is DataSource.CUSTOM_FILE and not self.path:
            raise ValueError("custom-file data needs data.path")
        return self

    @property
    def is_geodesic(self) -> bool:
        return self.source in (DataSource.GEODESIC_SMOOTH, DataSource.GEODESIC_ROUGH)


# ─── Convergence study ─────────────────────────────────────────────────────────


class NormPair(_Model):
    """Error norm H^{s_u} x H^{s_v} for (u, v)."""

    s_u: float = 0.0
    s_v: float | None = Field(None, description="Defaults to s_u - 1")

    @model_validator(mode="after")
    def _default_v(self) -> NormPair:
        if self.s_v is None:
            self.s_v = self.s_u - 1.0
        return self

    @property
    def v_order(self) -> float:
        return self.s_u - 1.0 if self.s_v is None else self.s_v

    @property
    def label(self) -> str:
        return f"{self.s_u:g}_{self.v_order:g}"


class StudyConfig(_Model):
    """A tau-sweep against a reference solution."""

    grid: GridSpec
    data: DataConfig = Field(default_factory=DataConfig)
    ladder: list[float] = Field(..., min_length=1, description="Strictly decreasing steps")
    t_final: float = Field(0.5, ge=0)
    norms: list[NormPair] = Field(default_factory=lambda: [NormPair(s_u=0.0, s_v=-1.0)])
    reference: ReferenceKind = ReferenceKind.EXACT
    filter_constant: float = Field(100.0, gt=0)
    activation_steps: int = Field(2, ge=2)
    filter_placement: FilterPlacement = FilterPlacement.LITERAL
    oracle_refinement: int = Field(16, ge=16, description="tau_fine = min(ladder) / refinement")

    @model_validator(mode="after")
    def _check(self) -> StudyConfig:
        for earlier, later in zip(self.ladder, self.ladder[1:], strict=False):
            if not later < earlier:
                raise ValueError(f"ladder must be strictly decreasing, got {self.ladder}")
        for tau in self.ladder:
            if not 0 < tau < 1:
                raise ValueError(f"ladder step {tau} outside (0, 1)")
            if steps_for(self.t_final, tau) is None:
                raise ValueError(f"ladder step {tau} does not divide t_final={self.t_final}")
            problem = filter_margin_violation(self.grid, tau, self.filter_constant)
            if problem:
                raise ValueError(problem)
        if self.reference is ReferenceKind.EXACT and not (
            self.data.is_geodesic or self.data.source is DataSource.CONSTANT_MAP
        ):
            raise ValueError(f"no exact solution for data source {self.data.source.value}")
        return self

    def scheme_params(self, tau: float) -> SchemeParams:
        return SchemeParams(
            grid=self.grid,
            tau=tau,
            t_end=self.t_final,
            filter_constant=self.filter_constant,
            activation_steps=self.activation_steps,
            filter_placement=self.filter_placement,
        )


class ConvergenceRow(_Model):
    """One ladder point of a convergence study."""

    tau: float
    err_u: float
    err_v: float
    err_total: float
    sphere_dev: float
    steps: int
    wall_ms: float
    status: RowStatus = RowStatus.OK


class RateFit(_Model):
    """Least-squares slope of log2(error) against log2(tau)."""

    rate: float
    residual: float
    points: int


class NormReport(_Model):
    """Rows and fitted rate for one error norm."""

    norm: NormPair
    rows: list[ConvergenceRow] = Field(default_factory=list)
    fit: RateFit | None = None


class ConvergenceReport(_Model):
    """Per-tau errors, fitted rates and provenance of a study."""

    config: StudyConfig
    norms: list[NormReport] = Field(default_factory=list)
    reference_detail: str = Field("", description="How the reference state was computed")
    filter_stats: list[FilterStats] = Field(default_factory=list)
    code_version: str = ""

    @property
    def ladder(self) -> list[float]:
        return self.config.ladder


# ─── Diagnostics ───────────────────────────────────────────────────────────────


class DiagnosticsConfig(_Model):
    """Exact-identity, vanishing and Strichartz suites."""

    n_per_axis: int = Field(128, ge=8, description="1D grid for identity checks")
    period: float = Field(20.0, gt=0)
    window: int = Field(32, ge=3, description="Spacetime window length M")
    tau: float = Field(0.0625, gt=0, lt=1)
    identity_tolerance: float = Field(1e-10, ge=0)
    parseval_tolerance: float = Field(1e-12, ge=0)
    vanishing_tolerance: float = Field(1e-10, ge=0)
    control_threshold: float = Field(1e-4, ge=0)
    trials: int = Field(20, ge=1)
    seed: int | None = None
    vanishing_cases: list[VanishingCase] = Field(default_factory=lambda: list(VanishingCase))
    vanishing_scales: dict[str, dict[str, int]] = Field(default_factory=dict)
    vanishing_control_scales: dict[str, dict[str, int]] = Field(default_factory=dict)
    shell_cap: int = Field(48, ge=1, description="Max width of capped dyadic shells")
    strichartz_pairs: list[tuple[float, float]] = Field(
        default_factory=lambda: [(4.0, 4.0), (math.inf, 2.0)]
    )
    strichartz_k: int = Field(3, ge=1)
    strichartz_trials: int = Field(50, ge=1)
    strichartz_ladder: list[float] = Field(default_factory=lambda: [0.0625, 0.03125, 0.015625])
    strichartz_n: int = Field(128, ge=8)
    spread_limit: float = Field(2.0, gt=1)


class CheckResult(_Model):
    """Outcome of one named check."""

    name: str
    status: CheckStatus
    value: float
    tolerance: float
    detail: str = ""


class VanishingReport(_Model):
    """Forbidden-band mass for one vanishing statement and its control."""

    case: VanishingCase
    scales: dict[str, int]
    n_points: int = Field(..., description="Spatial lattice size N")
    m_points: int = Field(..., description="Time window length M")
    violated: bool = Field(False, description="Hypotheses were not enforced")
    control_scales: dict[str, int] = Field(default_factory=dict)
    trials: int
    seed: int
    max_relative_mass: float
    control_relative_mass: float
    tolerance: float
    control_threshold: float
    status: CheckStatus
    control_status: CheckStatus


class StrichartzRow(_Model):
    """Ratio statistics at one step size."""

    tau: float
    frames: int
    max_ratio: float
    median_ratio: float


class StrichartzReport(_Model):
    """Strichartz ratio monitor over a step ladder."""

    p: float
    q: float
    k: int
    gamma: float
    trials: int
    seed: int
    rows: list[StrichartzRow] = Field(default_factory=list)
    spread: float
    bounded: bool
    status: CheckStatus = CheckStatus.MONITORED


class MonitorReport(_Model):
    """Ratio monitor without a computable constant."""

    name: str
    ratios: list[float]
    taus: list[float]
    spread: float
    status: CheckStatus = CheckStatus.MONITORED


class DiagnosticsReport(_Model):
    """Aggregated diagnostics suite results."""

    seed: int
    checks: list[CheckResult] = Field(default_factory=list)
    vanishing: list[VanishingReport] = Field(default_factory=list)
    strichartz: list[StrichartzReport] = Field(default_factory=list)
    monitors: list[MonitorReport] = Field(default_factory=list)
    code_version: str = ""

    @property
    def failures(self) -> list[str]:
        failed = [c.name for c in self.checks if c.status is CheckStatus.FAIL]
        for v in self.vanishing:
            if v.status is CheckStatus.FAIL:
                failed.append(f"vanishing:{v.case.value}")
            if v.control_status is CheckStatus.CONTROL_FAILED:
                failed.append(f"vanishing-control:{v.case.value}")
        return failed


# ─── Experiment files ──────────────────────────────────────────────────────────


class SchemeSection(_Model):
    """[scheme] section of an experiment file."""

    tau: float = Field(0.00390625, gt=0, lt=1)
    t_end: float = Field(0.5, ge=0)
    filter_constant: float = Field(1.0, gt=0)
    activation_steps: int = Field(2, ge=2)
    filter_placement: FilterPlacement = FilterPlacement.LITERAL
    snapshot_every: int = Field(0, ge=0, description="Snapshot stride in steps, 0 for final only")


class StudySection(_Model):
    """[study] section of an experiment file."""

    ladder: list[float] = Field(
        default_factory=lambda: [0.5 * 2.0**-e for e in range(6, 12)], min_length=1
    )
    t_final: float = Field(0.5, ge=0)
    norms: list[NormPair] = Field(default_factory=lambda: [NormPair(s_u=0.0, s_v=-1.0)])
    reference: ReferenceKind = ReferenceKind.EXACT
    oracle_refinement: int = Field(16, ge=16)


class OutputSection(_Model):
    """[output] section of an experiment file."""

    formats: list[str] = Field(default_factory=lambda: ["csv", "svg"])

    @field_validator("formats")
    @classmethod
    def _known(cls, value: list[str]) -> list[str]:
        unknown = set(value) - {"csv", "svg"}
        if unknown:
            raise ValueError(f"unknown report formats: {sorted(unknown)}")
        return value


class ExperimentConfig(_Model):
    """Root of an experiment file (TOML preset or JSON replay dump)."""

    grid: GridSpec = Field(default_factory=lambda: GridSpec())
    data: DataConfig = Field(default_factory=DataConfig)
    scheme: SchemeSection = Field(default_factory=SchemeSection)
    study: StudySection = Field(default_factory=StudySection)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    output: OutputSection = Field(default_factory=OutputSection)

    def scheme_params(self) -> SchemeParams:
        return SchemeParams(
            grid=self.grid,
            tau=self.scheme.tau,
            t_end=self.scheme.t_end,
            filter_constant=self.scheme.filter_constant,
            activation_steps=self.scheme.activation_steps,
            filter_placement=self.scheme.filter_placement,
        )

    def study_config(self) -> StudyConfig:
        return StudyConfig(
            grid=self.grid,
            data=self.data,
            ladder=self.study.ladder,
            t_final=self.study.t_final,
            norms=self.study.norms,
            reference=self.study.reference,
            filter_constant=self.scheme.filter_constant,
            activation_steps=self.scheme.activation_steps,
            filter_placement=self.scheme.filter_placement,
            oracle_refinement=self.study.oracle_refinement,
        )


# ─── Manifests ─────────────────────────────────────────────────────────────────


class RunManifest(_Model):
    """Record of a single evolution."""

    command: str = "run"
    code_version: str
    params: SchemeParams
    data: DataConfig
    seed: int
    status: RowStatus
    steps: int
    wall_ms: float
    final_time: float
    final_sphere_deviation: float | None = None
    deviation_series: list[tuple[int, float]] = Field(default_factory=list)
    filter_stats: FilterStats
    snapshots: list[str] = Field(default_factory=list)
    failed_step: int | None = None


class SynthManifest(_Model):
    """Record of a materialized dataset."""

    command: str = "synth"
    code_version: str
    grid: GridSpec
    data: DataConfig
    seed: int
    files: list[str]
    sphere_deviation: float


class StudyManifest(_Model):
    """Record of a convergence study."""

    command: str = "convergence"
    code_version: str
    seed: int
    threads: int
    files: list[str]
    wall_ms: dict[str, float] = Field(default_factory=dict)
