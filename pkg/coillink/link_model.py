"""
Link Model Module

Circuit domain types for a series-parallel (S-P) resonant two-coil link and
the closed-form phasor formulas built on them: mutual inductance, coil Q,
exact parallel resonance, power transfer efficiency, primary tank impedance,
reflected impedance (rational and direct forms), its real-valued
approximation, and the resulting primary current.

All internal angular frequencies are in rad/s; frequencies stored on a
scenario are in Hz.
"""
import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import ComputationError, DegenerateImpedanceError, NoRealResonanceError
from .utils import require_finite, require_non_negative, require_positive, require_range

logger = logging.getLogger(__name__)

# Smallest |Zpri| accepted before the primary current is declared degenerate
MIN_IMPEDANCE = 1e-12


@dataclass(frozen=True)
class CoilParams:
    """
    One physical coil.

    Attributes:
        inductance: Self-inductance in henries
        series_resistance: Series loss resistance in ohms
        label: Short free-text label
    """
    inductance: float
    series_resistance: float
    label: str = ""

    def __post_init__(self):
        require_positive(f"{self.label or 'coil'} inductance", self.inductance)
        require_positive(f"{self.label or 'coil'} series_resistance", self.series_resistance)


@dataclass(frozen=True)
class PrimaryTank:
    """Series capacitor and drive source of the primary"""
    c_s1: float
    source_amplitude: float = 1.0
    drive_frequency: float = 40.68e6

    def __post_init__(self):
        require_positive("c_s1", self.c_s1)
        require_positive("source_amplitude", self.source_amplitude)
        require_positive("drive_frequency", self.drive_frequency)


@dataclass(frozen=True)
class SecondaryTank:
    """
    Parallel secondary network.

    Attributes:
        c_s2: Tank capacitor in farads
        c_p: Parasitic capacitance of rectifier/OVP in farads, in parallel with c_s2
        r_load: Equivalent load resistance in ohms
        r_sw: Modulation shunt resistance in ohms
    """
    c_s2: float
    c_p: float = 0.0
    r_load: float = 12.5e3
    r_sw: float = 500.0

    def __post_init__(self):
        require_positive("c_s2", self.c_s2)
        require_non_negative("c_p", self.c_p)
        require_positive("r_load", self.r_load)
        require_positive("r_sw", self.r_sw)

    @property
    def c2(self) -> float:
        """Total parallel capacitance C2 = c_s2 + c_p"""
        return self.c_s2 + self.c_p


class LoadState(Enum):
    """Secondary loading during LSK: HEAVY means r_sw is shunted across r_load"""
    LIGHT = "light"
    HEAVY = "heavy"

    @classmethod
    def from_bit(cls, bit: int) -> "LoadState":
        # The switch is active high
        return cls.HEAVY if bit else cls.LIGHT


@dataclass(frozen=True)
class LinkScenario:
    """
    Complete two-tank circuit.

    The mutual inductance is derived from the coupling coefficient and is
    never stored.
    """
    primary_coil: CoilParams
    secondary_coil: CoilParams
    primary_tank: PrimaryTank
    secondary_tank: SecondaryTank
    coupling: float

    def __post_init__(self):
        require_range("coupling", self.coupling, 0.0, 1.0)

    @property
    def omega(self) -> float:
        """Drive angular frequency in rad/s"""
        return 2.0 * math.pi * self.primary_tank.drive_frequency

    @property
    def mutual_inductance(self) -> float:
        return mutual_inductance(self.coupling, self.primary_coil.inductance,
                                 self.secondary_coil.inductance)

    def effective_load(self, load: LoadState) -> float:
        """r_load when LIGHT, r_load ∥ r_sw when HEAVY"""
        tank = self.secondary_tank
        if load is LoadState.HEAVY:
            return tank.r_load * tank.r_sw / (tank.r_load + tank.r_sw)
        return tank.r_load

    def with_coupling(self, coupling: float) -> "LinkScenario":
        return replace(self, coupling=coupling)

    def with_c_s1(self, c_s1: float) -> "LinkScenario":
        return replace(self, primary_tank=replace(self.primary_tank, c_s1=c_s1))

    def with_c_p(self, c_p: float) -> "LinkScenario":
        return replace(self, secondary_tank=replace(self.secondary_tank, c_p=c_p))


@dataclass(frozen=True)
class ComplexValue:
    """
    Complex phasor quantity; ohms for impedances, amperes for currents.

    Both components must be finite.
    """
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ComputationError(f"non-finite phasor ({self.re!r}, {self.im!r})")

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexValue":
        return cls(float(value.real), float(value.imag))

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return abs(complex(self))

    def __add__(self, other: "ComplexValue") -> "ComplexValue":
        return ComplexValue(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexValue") -> "ComplexValue":
        return ComplexValue(self.re - other.re, self.im - other.im)

    @property
    def magnitude(self) -> float:
        return abs(self)

    @property
    def phase(self) -> float:
        """Argument in radians"""
        return cmath.phase(complex(self))


@dataclass(frozen=True)
class LinkDerived:
    """Dimensionless link figures at the drive frequency, plus M in henries"""
    q1: float
    q2: float
    alpha: float
    q_l: float
    mutual_inductance: float


# ---------------------------------------------------------------------------
# Scalar formulas
# ---------------------------------------------------------------------------

def mutual_inductance(k: float, l1: float, l2: float) -> float:
    """M = k·sqrt(L1·L2)"""
    require_range("coupling", k, 0.0, 1.0)
    require_positive("l1", l1)
    require_positive("l2", l2)
    return k * math.sqrt(l1 * l2)


def quality_factor(omega: float, l: float, r: float) -> float:
    """Q = ωL/R"""
    require_positive("omega", omega)
    require_positive("inductance", l)
    require_positive("resistance", r)
    return omega * l / r


def designed_capacitance(inductance: float, frequency: float) -> float:
    """Series-resonance capacitor 1/(ω²L) for a drive frequency in Hz"""
    require_positive("inductance", inductance)
    require_positive("frequency", frequency)
    omega = 2.0 * math.pi * frequency
    return 1.0 / (omega * omega * inductance)


def resonant_frequency_exact(l2: float, c2: float, r_load: float) -> float:
    """
    Frequency (rad/s) at which R_s2 + jωL + (1/jωC ∥ R_L) is purely real.

    ω₀ = (1/sqrt(LC))·sqrt(1 − L/(C·R_L²)); the series resistance drops out.

    Raises:
        NoRealResonanceError: when C·R_L² ≤ L
    """
    require_positive("l2", l2)
    require_positive("c2", c2)
    require_positive("r_load", r_load)
    correction = 1.0 - l2 / (c2 * r_load * r_load)
    if correction <= 0.0:
        raise NoRealResonanceError(
            f"no real resonance: C·R_L² = {c2 * r_load * r_load:.6g} ≤ L = {l2:.6g}")
    return math.sqrt(correction) / math.sqrt(l2 * c2)


def exact_resonance_capacitance(l2: float, r_load: float, omega: float) -> float:
    """
    Parallel capacitor that places the exact resonance at omega.

    Larger root of ω²L·R²·C² − R²·C + L = 0, the one that tends to 1/(ω²L)
    as R_L grows.
    """
    require_positive("l2", l2)
    require_positive("r_load", r_load)
    require_positive("omega", omega)
    discriminant = r_load * r_load - 4.0 * omega * omega * l2 * l2
    if discriminant < 0.0:
        raise NoRealResonanceError(
            f"no capacitor gives a real resonance at {omega:.6g} rad/s with R_L = {r_load:.6g}")
    return (r_load + math.sqrt(discriminant)) / (2.0 * omega * omega * l2 * r_load)


def pte(k: float, q1: float, q2: float, alpha: float) -> float:
    """
    Power transfer efficiency of the S-P link.

    η = k²Q1Q2² / ((1 + Q2/α + k²Q1Q2)(α + Q2))
    """
    require_range("coupling", k, 0.0, 1.0)
    require_positive("q1", q1)
    require_positive("q2", q2)
    require_positive("alpha", alpha)
    kq = k * k * q1 * q2
    return kq * q2 / ((1.0 + q2 / alpha + kq) * (alpha + q2))


def link_derived(scenario: LinkScenario, load: LoadState = LoadState.LIGHT,
                 use_bare_cs2: bool = False) -> LinkDerived:
    """
    Q1, Q2, α, Q_L and M at the drive frequency.

    α uses C2 = c_s2 + c_p unless use_bare_cs2 is set.
    """
    omega = scenario.omega
    r_eff = scenario.effective_load(load)
    tank = scenario.secondary_tank
    c = tank.c_s2 if use_bare_cs2 else tank.c2
    l2 = scenario.secondary_coil.inductance
    return LinkDerived(
        q1=quality_factor(omega, scenario.primary_coil.inductance,
                          scenario.primary_coil.series_resistance),
        q2=quality_factor(omega, l2, scenario.secondary_coil.series_resistance),
        alpha=omega * c * r_eff,
        q_l=omega * l2 / r_eff,
        mutual_inductance=scenario.mutual_inductance,
    )


def pte_of_scenario(scenario: LinkScenario, load: LoadState = LoadState.LIGHT,
                    use_bare_cs2: bool = False) -> float:
    derived = link_derived(scenario, load, use_bare_cs2)
    return pte(scenario.coupling, derived.q1, derived.q2, derived.alpha)


# ---------------------------------------------------------------------------
# Impedances and currents
# ---------------------------------------------------------------------------

def z11(omega: float, scenario: LinkScenario) -> ComplexValue:
    """Primary series branch R_s1 + jωL_s1 + 1/(jωC_s1)"""
    require_positive("omega", omega)
    coil = scenario.primary_coil
    reactance = omega * coil.inductance - 1.0 / (omega * scenario.primary_tank.c_s1)
    return ComplexValue(coil.series_resistance, reactance)


def zeq_rational(omega: float, scenario: LinkScenario, load: LoadState) -> ComplexValue:
    """
    Reflected impedance as an expanded rational function of ω.

    C2 = c_s2 + c_p and R_L is the load-state effective load. The
    denominator carries the ω⁴C2²R_L²L_s2² term, without which the form is
    not equal to ω²M²/Z2.
    """
    require_positive("omega", omega)
    k = scenario.coupling
    l1 = scenario.primary_coil.inductance
    l2 = scenario.secondary_coil.inductance
    rs2 = scenario.secondary_coil.series_resistance
    r = scenario.effective_load(load)
    c2 = scenario.secondary_tank.c2
    w2 = omega * omega

    # k² enters only here, so doubling k scales the result by exactly 4
    prefactor = w2 * (k * k) * l1 * l2
    num_re = r + rs2 + w2 * c2 * c2 * r * r * rs2
    num_im = -omega * (l2 - c2 * r * r + w2 * c2 * c2 * l2 * r * r)
    den = (r + rs2) ** 2 + w2 * (l2 * l2 + r * r * c2 * (rs2 * rs2 * c2 - 2.0 * l2)
                                 + w2 * c2 * c2 * r * r * l2 * l2)
    if den <= 0.0 or not math.isfinite(den):
        raise ComputationError(f"reflected-impedance denominator degenerate: {den!r}")
    return ComplexValue(prefactor * num_re / den, prefactor * num_im / den)


def secondary_branch_impedance(omega: float, scenario: LinkScenario, load: LoadState,
                               capacitance: Optional[float] = None) -> complex:
    """Z2 = R_s2 + jωL_s2 + (1/jωC ∥ R_L); C defaults to c_s2 + c_p"""
    coil = scenario.secondary_coil
    r = scenario.effective_load(load)
    c = scenario.secondary_tank.c2 if capacitance is None else capacitance
    z_parallel = r / (1.0 + 1j * omega * c * r)
    return coil.series_resistance + 1j * omega * coil.inductance + z_parallel


def zeq_simplified(omega: float, scenario: LinkScenario, load: LoadState) -> ComplexValue:
    """ω²M²/(R_s2 + jωL_s2 + (1/jωC_s2 ∥ R_L)) by direct complex division, c_p ignored"""
    require_positive("omega", omega)
    m = scenario.mutual_inductance
    z2 = secondary_branch_impedance(omega, scenario, load, scenario.secondary_tank.c_s2)
    value = (omega * omega * m * m) / z2
    require_finite("zeq_simplified", value)
    return ComplexValue.from_complex(value)


def req_approx(scenario: LinkScenario, load: LoadState) -> float:
    """
    Real approximation of the reflected resistance at the drive frequency.

    R_eq ≈ ω₀²k²L_s1L_s2 / ((1 + Q2·Q_L)·R_s2), Q_L = ω₀L_s2/R_L.
    Valid when the output is well filtered (α = ω₀C_s2R_L ≫ 1); an advisory
    is logged otherwise.
    """
    omega = scenario.omega
    k = scenario.coupling
    l1 = scenario.primary_coil.inductance
    l2 = scenario.secondary_coil.inductance
    rs2 = scenario.secondary_coil.series_resistance
    r = scenario.effective_load(load)
    alpha = omega * scenario.secondary_tank.c_s2 * r
    if alpha < 10.0:
        logger.warning(f"req_approx: α = ω₀·C_s2·R_L = {alpha:.3g} < 10, "
                       f"the reflected-resistance approximation is weak ({load.value} load)")
    q2 = quality_factor(omega, l2, rs2)
    q_l = omega * l2 / r
    return (omega * omega) * (k * k) * l1 * l2 / ((1.0 + q2 * q_l) * rs2)


def zpri(omega: float, scenario: LinkScenario, load: LoadState) -> ComplexValue:
    """Primary input impedance Z11 + Zeq"""
    return z11(omega, scenario) + zeq_rational(omega, scenario, load)


def primary_current(scenario: LinkScenario, load: LoadState) -> ComplexValue:
    """I1 = V_s / Z_pri at the drive frequency; source phase is zero"""
    impedance = complex(zpri(scenario.omega, scenario, load))
    if not abs(impedance) > MIN_IMPEDANCE:
        raise DegenerateImpedanceError(f"|Zpri| = {abs(impedance):.3g} Ω is degenerate")
    current = scenario.primary_tank.source_amplitude / impedance
    logger.debug(f"I1({load.value}, k={scenario.coupling:.6g}) = {current:.6g} A")
    return ComplexValue.from_complex(current)


def secondary_current(scenario: LinkScenario, load: LoadState) -> ComplexValue:
    """I2 = −jωM·I1 / Z2, flowing into the parallel network"""
    omega = scenario.omega
    i1 = complex(primary_current(scenario, load))
    z2 = secondary_branch_impedance(omega, scenario, load)
    return ComplexValue.from_complex(-1j * omega * scenario.mutual_inductance * i1 / z2)

