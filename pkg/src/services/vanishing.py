"""Modulation vanishing statements checked exactly on a discrete spacetime lattice.

Each case multiplies two random sequences with sharp spectral support in the hypothesized
regions and measures the mass of the product in the forbidden output modulation band.
The lattice uses unit spacings in sigma and xi (L = 2 pi, tau = 2 pi / M, one space
dimension). The product spectrum is the cyclic convolution of the two supports, summed
pair by pair, so sigma sums wrap with period 2 pi / tau exactly as for bi-infinite
sequences and only the support points are ever stored.

Every case also runs a control with its hypotheses deliberately violated; the control
must put mass into the forbidden band.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.config import get_settings
from src.exceptions import InfeasibleScalesError
from src.models import CheckStatus, VanishingCase, VanishingReport
from src.services.bourgain import sharp_band

logger = logging.getLogger(__name__)

IntArray = NDArray[np.int64]
ComplexArray = NDArray[np.complex128]

# gap is the margin m in the Q_{<= l - m} cutoffs of the hypotheses.
DEFAULT_SCALES: dict[VanishingCase, dict[str, int]] = {
    VanishingCase.GEOM4: {"l": 10, "gap": 10},
    VanishingCase.GEOM5: {"l": 0, "r": 10, "gap": 10},
    VanishingCase.CLAIM2: {"k1": 10, "k2": 0, "l": 10, "gap": 10},
    VanishingCase.CLAIM1: {"k1": 3, "k2": 0, "l": 13, "gap": 10},
    VanishingCase.CLAIM3: {"k1": 0, "k2": 0, "r": 0, "j": 10, "l": 0},
    VanishingCase.CLAIM4: {"k1": 0, "k2": 10, "j": 10, "l": 0, "r": 0},
}

# Scales that break each hypothesis; the output then reaches the forbidden band.
CONTROL_SCALES: dict[VanishingCase, dict[str, int]] = {
    VanishingCase.GEOM4: {"l": 4, "gap": 0},
    VanishingCase.GEOM5: {"l": 4, "r": 5, "gap": 0},
    VanishingCase.CLAIM2: {"k1": 4, "k2": 1, "l": 2},
    VanishingCase.CLAIM1: {"k1": 2, "k2": 2, "l": 3},
    VanishingCase.CLAIM3: {"k1": 0, "k2": 0, "r": 0, "j": 3, "l": 3},
    VanishingCase.CLAIM4: {"k1": 0, "k2": 4, "j": 3, "l": 3, "r": 0},
}

# Spatial extent of the factor that carries no dyadic spatial localization.
FREE_EXTENT = 16
# Working bytes per support pair: two wrapped indices, the key, its inverse, the coefficient.
PAIR_BYTES = 48


# ─── Support regions ───────────────────────────────────────────────────────────


def _between(x: NDArray[np.generic], lo: float, hi: float) -> NDArray[np.bool_]:
    return (x > lo) & (x <= hi)


def _wrap(values: IntArray, period: int) -> IntArray:
    """Representative in [-period/2, period/2)."""
    return (values + period // 2) % period - period // 2


@dataclass(frozen=True)
class Region:
    """lo < |xi| <= hi and lo < ||sigma| - |xi|| <= hi; lo < 0 closes the interval at 0.

    A time-only region is spatially constant and its modulation bounds apply to |sigma|.
    """

    xi_lo: float
    xi_hi: float
    mod_lo: float
    mod_hi: float
    time_only: bool = False

    def xi_mask(self, xi: NDArray[np.generic]) -> NDArray[np.bool_]:
        if self.time_only:
            return np.asarray(xi == 0)
        return _between(xi, self.xi_lo, self.xi_hi)

    def mask(self, sigma: NDArray[np.generic], xi: NDArray[np.generic]) -> NDArray[np.bool_]:
        if self.time_only:
            return self.xi_mask(xi) & _between(sigma, self.mod_lo, self.mod_hi)
        return self.xi_mask(xi) & _between(np.abs(sigma - xi), self.mod_lo, self.mod_hi)

    def support(self, n_points: int, m_points: int) -> tuple[IntArray, IntArray]:
        """Signed (sigma, xi) points of the region inside the N x M fundamental domain."""
        xi = np.arange(-(n_points // 2), n_points // 2, dtype=np.int64)
        xi = xi[self.xi_mask(np.abs(xi))]
        sigma = np.arange(-(m_points // 2), m_points // 2, dtype=np.int64)
        s, x = np.meshgrid(sigma, xi, indexing="ij")
        keep = self.mask(np.abs(s), np.abs(x))
        return s[keep], x[keep]

    @property
    def xi_extent(self) -> float:
        return 0.0 if self.time_only else self.xi_hi

    @property
    def sigma_extent(self) -> float:
        """Largest |sigma| needed to represent the region (or a non-empty part of it)."""
        if self.time_only:
            return self.mod_hi
        floor = max(self.mod_lo, 0.0)
        if self.xi_hi > floor:
            return self.xi_hi - floor
        return self.xi_hi + self.mod_hi


def dyadic(index: int, cap: float | None = None) -> tuple[float, float]:
    """Sharp dyadic interval: [0, 1] for 0, (2^(i-1), min(2^i, 2^(i-1) + cap)] otherwise."""
    if index == 0:
        return -1.0, 1.0
    lo = 2.0 ** (index - 1)
    hi = 2.0**index
    return lo, hi if cap is None else min(hi, lo + cap)


def below(exponent: int) -> tuple[float, float]:
    """[0, 2^exponent]."""
    return -1.0, 2.0**exponent


def _region(space: tuple[float, float], mod: tuple[float, float]) -> Region:
    return Region(space[0], space[1], mod[0], mod[1])


# ─── Case setup ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class VanishingSetup:
    """Supports of both factors and the forbidden output band."""

    case: VanishingCase
    scales: dict[str, int]
    first: Region
    second: Region
    output_band: int


def _merge_scales(case: VanishingCase, scales: dict[str, int] | None) -> dict[str, int]:
    merged = dict(DEFAULT_SCALES[case])
    unknown = set(scales or {}) - set(merged)
    if unknown:
        raise InfeasibleScalesError(case.value, f"unknown scale names {sorted(unknown)}")
    merged.update(scales or {})
    for name, value in merged.items():
        if value < 0:
            raise InfeasibleScalesError(case.value, f"{name} >= 0")
    return merged


def build_setup(
    case: VanishingCase,
    scales: dict[str, int] | None = None,
    shell_cap: int = 48,
    violate: bool = False,
) -> VanishingSetup:
    """Translate a case and its scales into sharp support regions.

    With violate=True the case hypotheses are not enforced; scale names and signs still are.
    """
    merged = _merge_scales(case, scales)
    cap = float(shell_cap)
    ball = (-1.0, float(FREE_EXTENT))

    def require(conditions: list[tuple[bool, str]]) -> None:
        if violate:
            return
        for holds, text in conditions:
            if not holds:
                raise InfeasibleScalesError(case.value, text)

    if case is VanishingCase.GEOM4:
        l, gap = merged["l"], merged["gap"]  # noqa: E741
        require([(gap >= 10, "gap >= 10")])
        return VanishingSetup(
            case, merged,
            first=Region(0.0, 0.0, *below(l - gap), time_only=True),
            second=_region(ball, below(l - gap)),
            output_band=l,
        )
    if case is VanishingCase.GEOM5:
        l, r, gap = merged["l"], merged["r"], merged["gap"]  # noqa: E741
        require([(r >= l + 10, "r >= l + 10"), (gap >= 10, "gap >= 10")])
        return VanishingSetup(
            case, merged,
            first=Region(0.0, 0.0, *below(r - gap), time_only=True),
            second=_region(ball, dyadic(r, cap)),
            output_band=l,
        )
    if case in (VanishingCase.CLAIM2, VanishingCase.CLAIM1):
        k1, k2, l, gap = (merged[n] for n in ("k1", "k2", "l", "gap"))
        if case is VanishingCase.CLAIM2:
            require([(l >= k2 + 10, "l >= k2 + 10"), (k1 >= k2 + 10, "k1 >= k2 + 10")])
        else:
            require([(k2 <= k1 <= k2 + 10, "k2 <= k1 <= k2 + 10"), (l >= k1 + 10, "l >= k1 + 10")])
        require([(gap >= 10, "gap >= 10")])
        return VanishingSetup(
            case, merged,
            first=_region(dyadic(k1, cap), below(l - gap)),
            second=_region(dyadic(k2, cap), below(l - gap)),
            output_band=l,
        )
    if case is VanishingCase.CLAIM3:
        k1, k2, r, j, l = (merged[n] for n in ("k1", "k2", "r", "j", "l"))
        require(
            [(j >= max(r, k1, k2) + 10, "j >= max(r, k1, k2) + 10"),
             (abs(j - l) >= 10, "|j - l| >= 10")],
        )
        return VanishingSetup(
            case, merged,
            first=_region(dyadic(k1, cap), dyadic(j, cap)),
            second=_region(dyadic(k2, cap), dyadic(l, cap)),
            output_band=r,
        )
    k1, k2, j, l, r = (merged[n] for n in ("k1", "k2", "j", "l", "r"))
    require(
        [
            (k2 >= k1 + 10, "k2 >= k1 + 10"),
            (j >= k1 + 10, "j >= k1 + 10"),
            (l <= j - 10, "l <= j - 10"),
            (r <= j - 10, "r <= j - 10"),
        ],
    )
    return VanishingSetup(
        case, merged,
        first=_region(dyadic(k1, cap), dyadic(r, cap)),
        second=_region(dyadic(k2, cap), dyadic(j, cap)),
        output_band=l,
    )


def plan_lattice(setup: VanishingSetup) -> tuple[int, int]:
    """Spatial size N (power of two, no aliasing of xi sums) and window M (multiple of 64)."""
    xi_sum = setup.first.xi_extent + setup.second.xi_extent
    n_points = max(16, 1 << math.ceil(math.log2(2 * xi_sum + 2)))
    extent = max(setup.first.sigma_extent, setup.second.sigma_extent)
    m_points = max(64, 64 * math.ceil((2 * extent + 2) / 64))
    return n_points, m_points


# ─── Sparse products ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SparseSpectrum:
    """Coefficients on signed lattice points of an N x M window."""

    sigma: IntArray
    xi: IntArray
    coeffs: ComplexArray
    n_points: int
    m_points: int

    @property
    def mass(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def band_mass(self, band: int) -> float:
        modulation = np.abs(np.abs(self.sigma) - np.abs(self.xi))
        return float(np.sum(np.abs(self.coeffs[sharp_band(modulation, band)]) ** 2))


def product_spectrum(u: SparseSpectrum, v: SparseSpectrum) -> SparseSpectrum:
    """Spectrum of the pointwise product: cyclic convolution over all support pairs."""
    n, m = u.n_points, u.m_points
    sigma = _wrap(u.sigma[:, np.newaxis] + v.sigma[np.newaxis, :], m).ravel()
    xi = _wrap(u.xi[:, np.newaxis] + v.xi[np.newaxis, :], n).ravel()
    coeffs = (u.coeffs[:, np.newaxis] * v.coeffs[np.newaxis, :]).ravel()
    keys = (sigma + m // 2) * n + (xi + n // 2)
    unique, inverse = np.unique(keys, return_inverse=True)
    real = np.bincount(inverse, weights=coeffs.real, minlength=unique.size)
    imag = np.bincount(inverse, weights=coeffs.imag, minlength=unique.size)
    return SparseSpectrum(
        sigma=unique // n - m // 2,
        xi=unique % n - n // 2,
        coeffs=real + 1j * imag,
        n_points=n,
        m_points=m,
    )


def forbidden_mass(u: SparseSpectrum, v: SparseSpectrum, band: int) -> float:
    """sum_band |coeffs(uv)|^2 / (sum |a_u|^2 sum |a_v|^2)."""
    return product_spectrum(u, v).band_mass(band) / (u.mass * v.mass)


def _random_on(points: tuple[IntArray, IntArray], lattice: tuple[int, int],
               rng: np.random.Generator) -> SparseSpectrum:
    sigma, xi = points
    values = rng.standard_normal(sigma.size) + 1j * rng.standard_normal(sigma.size)
    return SparseSpectrum(sigma, xi, values, *lattice)


def _worst_mass(setup: VanishingSetup, seeds: list[list[int]]) -> tuple[float, int, int]:
    n_points, m_points = plan_lattice(setup)
    names = ("first factor", "second factor")
    supports = [region.support(n_points, m_points) for region in (setup.first, setup.second)]
    for (sigma, _), name in zip(supports, names, strict=True):
        if sigma.size == 0:
            raise InfeasibleScalesError(
                setup.case.value,
                f"{name} support is empty on the {n_points}x{m_points} lattice",
            )
    budget = get_settings().memory_budget_mb * 1024 * 1024
    needed = supports[0][0].size * supports[1][0].size * PAIR_BYTES
    if needed > budget:
        raise InfeasibleScalesError(
            setup.case.value,
            f"{supports[0][0].size}x{supports[1][0].size} support pairs need "
            f"~{needed / 2**20:.0f} MiB, memory budget is {budget / 2**20:.0f} MiB",
        )

    worst = 0.0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        u = _random_on(supports[0], (n_points, m_points), rng)
        v = _random_on(supports[1], (n_points, m_points), rng)
        worst = max(worst, forbidden_mass(u, v, setup.output_band))
    return worst, n_points, m_points


def vanishing_check(
    case: VanishingCase,
    scales: dict[str, int] | None = None,
    trials: int = 20,
    seed: int = 0,
    tolerance: float = 1e-10,
    control_threshold: float = 1e-4,
    shell_cap: int = 48,
    violate: bool = False,
    control_scales: dict[str, int] | None = None,
) -> VanishingReport:
    """Run random trials for one vanishing statement plus its hypothesis-violating control."""
    setup = build_setup(case, scales, shell_cap, violate=violate)
    if violate:
        logger.warning("Vanishing %s %s: hypotheses not enforced", case.value, setup.scales)
    worst, n_points, m_points = _worst_mass(setup, [[seed, trial] for trial in range(trials)])

    control_setup = build_setup(
        case, control_scales or CONTROL_SCALES[case], shell_cap, violate=True
    )
    control, _, _ = _worst_mass(control_setup, [[seed, trials]])

    status = CheckStatus.PASS if worst < tolerance else CheckStatus.FAIL
    control_status = (
        CheckStatus.EXPECTED_FAIL if control > control_threshold else CheckStatus.CONTROL_FAILED
    )
    logger.info(
        "Vanishing %s %s on %dx%d: max mass %.3e (%s), control %s %.3e (%s)",
        case.value,
        setup.scales,
        n_points,
        m_points,
        worst,
        status.value,
        control_setup.scales,
        control,
        control_status.value,
    )
    return VanishingReport(
        case=case,
        scales=setup.scales,
        n_points=n_points,
        m_points=m_points,
        violated=violate,
        control_scales=control_setup.scales,
        trials=trials,
        seed=seed,
        max_relative_mass=worst,
        control_relative_mass=control,
        tolerance=tolerance,
        control_threshold=control_threshold,
        status=status,
        control_status=control_status,
    )
