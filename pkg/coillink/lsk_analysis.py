"""
LSK Analysis Module

Robustness of load-shift-keying uplink against tank mismatch: primary
impedance and current differences between load states, sweeps over the
coupling coefficient, detection of the coupling at which the uplink polarity
flips, and the primary-capacitor detune that removes the flip.

Sign conventions:
    ΔZpri = Zpri(light) − Zpri(heavy)
    ΔI1   = |I1(light)| − |I1(heavy)|   (negative = healthy uplink)
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from .errors import UnsolvableError, ValidationError
from .link_model import ComplexValue, LinkScenario, LoadState, primary_current, zpri
from .presets import designed_c_s1
from .utils import require_non_negative, require_range

logger = logging.getLogger(__name__)

DEFAULT_K_RANGE = (0.01, 0.2)
DEFAULT_POINTS = 200
ROOT_TOLERANCE = 1e-5

DETUNE_GRID_STEP = 5e-4
DETUNE_LIMIT = 0.05
DETUNE_TOLERANCE = 1e-7
DETUNE_MIN_SAMPLES = 200


class SweepScale(Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class SweepSpec:
    """
    Coupling axis of a sweep.

    Attributes:
        k_min, k_max: Bounds, 0 ≤ k_min < k_max < 1 (k_min > 0 for LOG)
        points: Number of samples, at least 2
        scale: LINEAR or LOG spacing
    """
    k_min: float = DEFAULT_K_RANGE[0]
    k_max: float = DEFAULT_K_RANGE[1]
    points: int = DEFAULT_POINTS
    scale: SweepScale = SweepScale.LINEAR

    def __post_init__(self):
        require_range("k_min", self.k_min, 0.0, 1.0)
        require_range("k_max", self.k_max, 0.0, 1.0)
        if not self.k_min < self.k_max:
            raise ValidationError(f"k_min ({self.k_min}) must be below k_max ({self.k_max})")
        if not isinstance(self.points, int) or isinstance(self.points, bool) or self.points < 2:
            raise ValidationError(f"points must be an integer ≥ 2, got {self.points!r}")
        if self.scale is SweepScale.LOG and self.k_min <= 0.0:
            raise ValidationError("a log sweep needs k_min > 0")

    def couplings(self) -> np.ndarray:
        if self.scale is SweepScale.LOG:
            ks = np.geomspace(self.k_min, self.k_max, self.points)
        else:
            ks = np.linspace(self.k_min, self.k_max, self.points)
        # geomspace/linspace can round the endpoints
        ks[0], ks[-1] = self.k_min, self.k_max
        return ks


@dataclass(frozen=True)
class MismatchSpec:
    """
    Deviations applied on top of a scenario template.

    Attributes:
        c_p_override: Secondary parasitic capacitance in farads; None keeps the template's
        c_s1_relative_error: C_s1 relative to its designed value (+0.01 = 1% above);
            None keeps the template's C_s1
    """
    c_p_override: Optional[float] = None
    c_s1_relative_error: Optional[float] = None

    def __post_init__(self):
        if self.c_p_override is not None:
            require_non_negative("c_p_override", self.c_p_override)
        if self.c_s1_relative_error is not None:
            require_range("c_s1_relative_error", self.c_s1_relative_error, -0.5, 0.5,
                          low_inclusive=False)


@dataclass(frozen=True)
class SweepRow:
    k: float
    delta_zpri: ComplexValue
    delta_zpri_magnitude_difference: float
    delta_i1: float


@dataclass(frozen=True)
class SweepResult:
    """One row per sweep point, ascending in k"""
    rows: Tuple[SweepRow, ...]

    @property
    def k(self) -> np.ndarray:
        return np.array([row.k for row in self.rows])

    @property
    def delta_i1(self) -> np.ndarray:
        return np.array([row.delta_i1 for row in self.rows])

    @property
    def delta_zpri_magnitude_difference(self) -> np.ndarray:
        return np.array([row.delta_zpri_magnitude_difference for row in self.rows])

    def sign_changes(self) -> List[int]:
        """Row indices i where ΔI1 changes sign between row i and the next nonzero row"""
        return _sign_change_indices(self.delta_i1)


@dataclass(frozen=True)
class FlipThreshold:
    """
    Result of a flip search.

    Attributes:
        k_star: Smallest coupling where ΔI1 changes sign, None when no flip
        sign_changes: Number of sign changes seen on the sampling grid
        multiple: True when more than one sign change exists
        k_range: Searched range
    """
    k_star: Optional[float]
    sign_changes: int
    multiple: bool
    k_range: Tuple[float, float]

    @property
    def flipped(self) -> bool:
        return self.k_star is not None


@dataclass(frozen=True)
class DetuneSolution:
    """
    Primary capacitor below its designed value that keeps ΔI1 ≤ −margin.

    Attributes:
        c_s1_solved: Solved primary capacitor in farads
        relative_detune: (c_s1_solved / designed) − 1, always negative
        flip_free_range: Coupling range over which the margin was verified
        margin_achieved: Worst-case −ΔI1 over the range, in amperes
        detune_required: False when the undetuned scenario already met the margin
    """
    c_s1_solved: float
    relative_detune: float
    flip_free_range: Tuple[float, float]
    margin_achieved: float
    detune_required: bool = True


def apply_mismatch(template: LinkScenario, mismatch: Optional[MismatchSpec]) -> LinkScenario:
    """Scenario with the parasitic override and the primary capacitor error applied"""
    scenario = template
    if mismatch is None:
        return scenario
    if mismatch.c_p_override is not None:
        scenario = scenario.with_c_p(mismatch.c_p_override)
    if mismatch.c_s1_relative_error is not None:
        scenario = scenario.with_c_s1(designed_c_s1(scenario) * (1.0 + mismatch.c_s1_relative_error))
    return scenario


def delta_zpri(scenario: LinkScenario) -> ComplexValue:
    """Zpri(light) − Zpri(heavy) at the drive frequency"""
    omega = scenario.omega
    return zpri(omega, scenario, LoadState.LIGHT) - zpri(omega, scenario, LoadState.HEAVY)


def delta_zpri_magnitude(scenario: LinkScenario) -> float:
    """|Zpri(light)| − |Zpri(heavy)|, the scalar plotted against coupling"""
    omega = scenario.omega
    return abs(zpri(omega, scenario, LoadState.LIGHT)) - abs(zpri(omega, scenario, LoadState.HEAVY))


def delta_i1(scenario: LinkScenario) -> float:
    """|I1(light)| − |I1(heavy)|; positive means the uplink polarity is flipped"""
    return (abs(primary_current(scenario, LoadState.LIGHT))
            - abs(primary_current(scenario, LoadState.HEAVY)))


def sweep_coupling(scenario_template: LinkScenario, mismatch: Optional[MismatchSpec] = None,
                   spec: Optional[SweepSpec] = None) -> SweepResult:
    """Evaluate ΔZpri and ΔI1 at every coupling of the sweep"""
    spec = spec or SweepSpec()
    base = apply_mismatch(scenario_template, mismatch)
    rows = []
    for k in spec.couplings():
        scenario = base.with_coupling(float(k))
        rows.append(SweepRow(
            k=float(k),
            delta_zpri=delta_zpri(scenario),
            delta_zpri_magnitude_difference=delta_zpri_magnitude(scenario),
            delta_i1=delta_i1(scenario),
        ))
    result = SweepResult(tuple(rows))
    logger.info(f"Swept {spec.points} couplings over [{spec.k_min}, {spec.k_max}], "
                f"{len(result.sign_changes())} ΔI1 sign change(s)")
    return result


def _sign_change_indices(values: np.ndarray) -> List[int]:
    nonzero = np.flatnonzero(values != 0.0)
    signs = np.sign(values[nonzero])
    return [int(nonzero[i]) for i in np.flatnonzero(signs[:-1] != signs[1:])]


def _next_nonzero(values: np.ndarray, index: int) -> int:
    for j in range(index + 1, len(values)):
        if values[j] != 0.0:
            return j
    return len(values) - 1


def _delta_i1_of_k(base: LinkScenario) -> Callable[[float], float]:
    return lambda k: delta_i1(base.with_coupling(float(k)))


def flip_threshold(scenario_template: LinkScenario, mismatch: Optional[MismatchSpec] = None,
                   k_range: Tuple[float, float] = DEFAULT_K_RANGE,
                   points: int = DEFAULT_POINTS,
                   tolerance: float = ROOT_TOLERANCE) -> FlipThreshold:
    """
    Smallest coupling in k_range at which ΔI1 changes sign.

    ΔI1 is sampled on a linear grid; the first bracketed sign change is refined
    by bisection to `tolerance` in k. No sign change is a valid result.
    """
    spec = SweepSpec(k_range[0], k_range[1], points)
    base = apply_mismatch(scenario_template, mismatch)
    f = _delta_i1_of_k(base)
    ks = spec.couplings()
    values = np.array([f(k) for k in ks])
    changes = _sign_change_indices(values)
    if not changes:
        logger.info(f"No uplink flip over k ∈ [{k_range[0]}, {k_range[1]}]")
        return FlipThreshold(None, 0, False, (k_range[0], k_range[1]))

    first = changes[0]
    low, high = float(ks[first]), float(ks[_next_nonzero(values, first)])
    k_star = bisect(f, low, high, xtol=tolerance / 4.0)
    if len(changes) > 1:
        logger.warning(f"ΔI1 changes sign {len(changes)} times over "
                       f"[{k_range[0]}, {k_range[1]}]; reporting the smallest")
    logger.info(f"Uplink flips at k* = {k_star:.6g}")
    return FlipThreshold(float(k_star), len(changes), len(changes) > 1, (k_range[0], k_range[1]))


def _worst_delta_i1(base: LinkScenario, c_s1: float, ks: np.ndarray) -> float:
    scenario = base.with_c_s1(c_s1)
    return max(delta_i1(scenario.with_coupling(float(k))) for k in ks)


def detune_solve(scenario_template: LinkScenario, mismatch: Optional[MismatchSpec] = None,
                 k_range: Tuple[float, float] = DEFAULT_K_RANGE, margin: float = 0.0,
                 samples: int = DETUNE_MIN_SAMPLES, grid_step: float = DETUNE_GRID_STEP,
                 limit: float = DETUNE_LIMIT, tolerance: float = DETUNE_TOLERANCE) -> DetuneSolution:
    """
    Smallest downward detune of C_s1 that keeps ΔI1 ≤ −margin over k_range.

    The relative detune δ (C_s1 = designed·(1 + δ)) is searched on a grid of
    `grid_step` over [−limit, 0), then refined by bisection between the last
    failing and the first passing grid point. Only negative δ are searched.

    Raises:
        UnsolvableError: no δ in [−limit, 0) meets the margin
    """
    require_non_negative("margin", margin)
    if samples < DETUNE_MIN_SAMPLES:
        raise ValidationError(f"samples must be at least {DETUNE_MIN_SAMPLES}, got {samples}")
    spec = SweepSpec(k_range[0], k_range[1], samples)
    ks = spec.couplings()
    base = apply_mismatch(scenario_template, mismatch)
    designed = designed_c_s1(base)

    def worst(delta: float) -> float:
        return _worst_delta_i1(base, designed * (1.0 + delta), ks)

    def passes(delta: float) -> bool:
        return worst(delta) <= -margin

    flip_free_range = (k_range[0], k_range[1])
    if passes(0.0):
        delta = -grid_step
        logger.warning("Designed C_s1 already meets the margin; no detune needed")
        return DetuneSolution(designed * (1.0 + delta), delta, flip_free_range,
                              -worst(delta), detune_required=False)

    steps = int(round(limit / grid_step))
    failing = 0.0
    passing = None
    for n in range(1, steps + 1):
        delta = -n * grid_step
        if passes(delta):
            passing = delta
            break
        failing = delta
    if passing is None:
        raise UnsolvableError(
            f"no C_s1 detune in [-{limit:.2%}, 0) keeps ΔI1 ≤ -{margin:.3g} A "
            f"over k ∈ [{k_range[0]}, {k_range[1]}]")

    # passing stays feasible throughout
    while failing - passing > tolerance:
        middle = 0.5 * (failing + passing)
        if passes(middle):
            passing = middle
        else:
            failing = middle

    solution = DetuneSolution(designed * (1.0 + passing), passing, flip_free_range, -worst(passing))
    logger.info(f"Detuned C_s1 = {solution.c_s1_solved:.6g} F "
                f"({solution.relative_detune:+.4%}), margin {solution.margin_achieved:.4g} A")
    return solution
