"""
Built-in link scenarios.

"flat": both coils flat, 10 mm apart (L_s2 = 564 nH, k = 0.05).
"bended": secondary bent onto the eyeball (L_s2 = 562 nH, k = 0.042).
Tank capacitors are the designed values 1/(ω₀²L) at the drive frequency.
"""
from typing import Dict, Optional

from .errors import ValidationError
from .link_model import (CoilParams, LinkScenario, PrimaryTank, SecondaryTank,
                         designed_capacitance)

DRIVE_FREQUENCY = 40.68e6
SOURCE_AMPLITUDE = 1.0

PRIMARY_INDUCTANCE = 895e-9
PRIMARY_RESISTANCE = 1.114
SECONDARY_RESISTANCE = 2.333
R_LOAD = 12.5e3
R_SW = 500.0

PRESETS: Dict[str, Dict[str, float]] = {
    "flat": {"secondary_inductance": 564e-9, "coupling": 0.05},
    "bended": {"secondary_inductance": 562e-9, "coupling": 0.042},
}

DEFAULT_PRESET = "flat"


def designed_scenario(secondary_inductance: float, coupling: float,
                      drive_frequency: float = DRIVE_FREQUENCY,
                      c_p: float = 0.0,
                      primary_inductance: float = PRIMARY_INDUCTANCE,
                      primary_resistance: float = PRIMARY_RESISTANCE,
                      secondary_resistance: float = SECONDARY_RESISTANCE,
                      r_load: float = R_LOAD, r_sw: float = R_SW,
                      source_amplitude: float = SOURCE_AMPLITUDE) -> LinkScenario:
    """Scenario whose C_s1 and C_s2 both resonate their coils at the drive frequency"""
    return LinkScenario(
        primary_coil=CoilParams(primary_inductance, primary_resistance, "primary"),
        secondary_coil=CoilParams(secondary_inductance, secondary_resistance, "secondary"),
        primary_tank=PrimaryTank(
            c_s1=designed_capacitance(primary_inductance, drive_frequency),
            source_amplitude=source_amplitude,
            drive_frequency=drive_frequency,
        ),
        secondary_tank=SecondaryTank(
            c_s2=designed_capacitance(secondary_inductance, drive_frequency),
            c_p=c_p,
            r_load=r_load,
            r_sw=r_sw,
        ),
        coupling=coupling,
    )


def get_preset(name: Optional[str] = None) -> LinkScenario:
    """Return the named preset scenario (default "flat")"""
    name = name or DEFAULT_PRESET
    if name not in PRESETS:
        raise ValidationError(f"Unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return designed_scenario(**PRESETS[name])


def designed_c_s1(scenario: LinkScenario) -> float:
    """Designed primary capacitor for a scenario's own coil and drive frequency"""
    return designed_capacitance(scenario.primary_coil.inductance,
                                scenario.primary_tank.drive_frequency)
