"""Error hierarchy for wavemaps-splitting.

Every error carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class WaveMapsError(Exception):
    """Base class for solver, diagnostics and harness failures."""

    exit_code: int = 1


# ─── Configuration (exit 2) ────────────────────────────────────────────────────


class ConfigurationError(WaveMapsError, ValueError):
    """Invalid experiment configuration or parameter combination."""

    exit_code = 2


class InfeasibleScalesError(ConfigurationError):
    """Scale parameters violate a vanishing-case constraint or do not fit the lattice."""

    def __init__(self, case: str, constraint: str) -> None:
        super().__init__(f"{case}: infeasible scales, violated constraint: {constraint}")
        self.case = case
        self.constraint = constraint


class InadmissibleExponentsError(ConfigurationError):
    """Strichartz exponent pair outside the admissible range."""


# ─── Data and shape errors ─────────────────────────────────────────────────────


class GridMismatchError(WaveMapsError, ValueError):
    """Two fields live on different grids."""


class ShapeMismatchError(WaveMapsError, ValueError):
    """An array does not match the grid it is attached to."""


class HistoryError(WaveMapsError, ValueError):
    """Stepper history is missing entries or inconsistent with the state."""


class SupportViolationError(WaveMapsError, ValueError):
    """Spatial support exceeds the |xi| <= pi/(2 tau) restriction."""


class SeamDecayError(WaveMapsError, ValueError):
    """Initial data does not decay at the periodic seam."""


class InsufficientDataError(WaveMapsError, ValueError):
    """Fewer than two usable (tau, error) pairs for a rate fit."""


# ─── Numerical failures (exit 1) ───────────────────────────────────────────────


class NonFiniteError(WaveMapsError, ArithmeticError):
    """A non-finite value entered a computation."""


class BlowUpError(NonFiniteError):
    """Evolution produced non-finite values."""

    def __init__(self, step: int) -> None:
        super().__init__(f"non-finite state detected at step {step}")
        self.step = step


class OracleInstabilityError(WaveMapsError):
    """RK4 step too large for the retained spectrum."""

    def __init__(self, tau_fine: float, required_tau: float) -> None:
        super().__init__(
            f"RK4 oracle unstable at tau_fine={tau_fine:.6g}; "
            f"required tau_fine <= {required_tau:.6g}"
        )
        self.tau_fine = tau_fine
        self.required_tau = required_tau


class ReportWriteError(WaveMapsError):
    """An output file could not be written."""
