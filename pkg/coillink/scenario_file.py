"""
Scenario file reader and writer.

Line-oriented text:

    # comment
    preset = flat
    c_p = 12p                 # keys before any header go to their owning section

    [primary_tank]
    c_s1 = 17.03p
    drive_frequency = 40.68MHz

Numbers accept SI prefixes and units (12p, 40.68MHz, 12.5k). Missing values
come from the selected preset; missing tank capacitors are the designed
values for the (possibly overridden) coil inductances and drive frequency.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from .errors import ScenarioParseError, UnknownKeyError, ValidationError
from .link_model import (CoilParams, LinkScenario, PrimaryTank, SecondaryTank,
                         designed_capacitance)
from .lsk_analysis import MismatchSpec, SweepScale, SweepSpec
from .presets import DEFAULT_PRESET, PRESETS, get_preset
from .transient import TransientConfig, format_pattern, parse_pattern
from .utils import parse_si, validate_keys

logger = logging.getLogger(__name__)

NONE_WORDS = ("none", "auto", "")


def _number(text: str) -> float:
    return parse_si(text)


def _optional_number(text: str) -> Optional[float]:
    return None if text.strip().lower() in NONE_WORDS else parse_si(text)


def _integer(text: str) -> int:
    value = parse_si(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _scale(text: str) -> SweepScale:
    try:
        return SweepScale(text.strip().lower())
    except ValueError:
        raise ValueError(f"scale must be one of {[s.value for s in SweepScale]}, got {text!r}")


def _pattern(text: str) -> Tuple[int, ...]:
    return parse_pattern(text)


# section -> key -> parser
SECTIONS: Dict[str, Dict[str, Callable[[str], object]]] = {
    "primary_coil": {"inductance": _number, "series_resistance": _number},
    "secondary_coil": {"inductance": _number, "series_resistance": _number},
    "primary_tank": {"c_s1": _number, "source_amplitude": _number, "drive_frequency": _number},
    "secondary_tank": {"c_s2": _number, "c_p": _number, "r_load": _number, "r_sw": _number},
    "link": {"coupling": _number},
    "mismatch": {"c_p_override": _optional_number, "c_s1_relative_error": _optional_number},
    "sweep": {"k_min": _number, "k_max": _number, "points": _integer, "scale": _scale},
    "transient": {
        "time_step": _optional_number,
        "duration": _optional_number,
        "bit_period": _number,
        "sw_pattern": _pattern,
        "settle_time": _number,
        "sample_fraction": _number,
    },
}

TOP_LEVEL_KEYS = ("preset",)


def _key_owners() -> Dict[str, List[str]]:
    owners: Dict[str, List[str]] = {}
    for section, keys in SECTIONS.items():
        for key in keys:
            owners.setdefault(key, []).append(section)
    return owners


KEY_OWNERS = _key_owners()


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Fully validated configuration of one run.

    Attributes:
        scenario: The circuit
        mismatch: Deviations applied by the analysis commands
        sweep: Coupling axis for sweeps and searches
        transient: Time-domain settings
        preset: Name of the preset the defaults came from
    """
    scenario: LinkScenario
    mismatch: MismatchSpec = field(default_factory=MismatchSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    transient: TransientConfig = field(default_factory=TransientConfig)
    preset: str = DEFAULT_PRESET


@dataclass
class _Entry:
    value: object
    line: int


class _Document:
    """Parsed values per section, with the line each came from"""

    def __init__(self):
        self.sections: Dict[str, Dict[str, _Entry]] = {name: {} for name in SECTIONS}
        self.top: Dict[str, _Entry] = {}

    def get(self, section: str, key: str, default=None):
        entry = self.sections[section].get(key)
        return default if entry is None else entry.value

    def line_of(self, section: str, message: str) -> Optional[int]:
        """Line of the key a validation message talks about, else the section's first line"""
        entries = self.sections[section]
        for key in sorted(entries, key=len, reverse=True):
            if key in message:
                return entries[key].line
        lines = [entry.line for entry in entries.values()]
        return min(lines) if lines else None


def _split_lines(text: str) -> _Document:
    document = _Document()
    section: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioParseError(f"malformed section header {raw.strip()!r}", number)
            name = line[1:-1].strip()
            validate_keys([name], SECTIONS, number, reason="unknown section")
            section = name
            continue
        if "=" not in line:
            raise ScenarioParseError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ScenarioParseError("missing key before '='", number)

        if section is None and key in TOP_LEVEL_KEYS:
            document.top[key] = _Entry(value, number)
            continue
        target = section
        if target is None:
            validate_keys([key], KEY_OWNERS, number)
            owners = KEY_OWNERS[key]
            if len(owners) > 1:
                raise UnknownKeyError(key, number,
                                      reason=f"ambiguous key (write it under one of {owners})")
            target = owners[0]
        validate_keys([key], SECTIONS[target], number, where=target)
        parser = SECTIONS[target][key]
        if key in document.sections[target]:
            raise ScenarioParseError(f"duplicate key '{target}.{key}'", number)
        try:
            parsed = parser(value)
        except ValueError as e:
            raise ScenarioParseError(f"bad value for '{key}': {e}", number) from e
        document.sections[target][key] = _Entry(parsed, number)
    return document


def _build(section: str, document: _Document, factory: Callable[[], object]):
    try:
        return factory()
    except ValidationError as e:
        if isinstance(e, ScenarioParseError):
            raise
        raise ScenarioParseError(f"[{section}] {e}", document.line_of(section, str(e))) from e


def _build_scenario(document: _Document, base: LinkScenario) -> LinkScenario:
    get = document.get
    primary = _build("primary_coil", document, lambda: CoilParams(
        get("primary_coil", "inductance", base.primary_coil.inductance),
        get("primary_coil", "series_resistance", base.primary_coil.series_resistance),
        "primary"))
    secondary = _build("secondary_coil", document, lambda: CoilParams(
        get("secondary_coil", "inductance", base.secondary_coil.inductance),
        get("secondary_coil", "series_resistance", base.secondary_coil.series_resistance),
        "secondary"))

    def primary_tank() -> PrimaryTank:
        frequency = get("primary_tank", "drive_frequency", base.primary_tank.drive_frequency)
        c_s1 = get("primary_tank", "c_s1")
        if c_s1 is None:
            c_s1 = designed_capacitance(primary.inductance, frequency)
        return PrimaryTank(c_s1, get("primary_tank", "source_amplitude",
                                     base.primary_tank.source_amplitude), frequency)

    tank1 = _build("primary_tank", document, primary_tank)

    def secondary_tank() -> SecondaryTank:
        c_s2 = get("secondary_tank", "c_s2")
        if c_s2 is None:
            c_s2 = designed_capacitance(secondary.inductance, tank1.drive_frequency)
        return SecondaryTank(
            c_s2,
            get("secondary_tank", "c_p", base.secondary_tank.c_p),
            get("secondary_tank", "r_load", base.secondary_tank.r_load),
            get("secondary_tank", "r_sw", base.secondary_tank.r_sw),
        )

    tank2 = _build("secondary_tank", document, secondary_tank)
    return _build("link", document, lambda: LinkScenario(
        primary, secondary, tank1, tank2, get("link", "coupling", base.coupling)))


def parse_scenario_text(text: str) -> ScenarioConfig:
    document = _split_lines(text)
    preset_entry = document.top.get("preset")
    preset = preset_entry.value if preset_entry else DEFAULT_PRESET
    if preset not in PRESETS:
        raise ScenarioParseError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}",
                                 preset_entry.line)
    base = get_preset(preset)
    scenario = _build_scenario(document, base)

    mismatch = _build("mismatch", document, lambda: MismatchSpec(**{
        key: entry.value for key, entry in document.sections["mismatch"].items()}))
    sweep = _build("sweep", document, lambda: SweepSpec(**{
        key: entry.value for key, entry in document.sections["sweep"].items()}))
    transient = _build("transient", document, lambda: TransientConfig(**{
        key: entry.value for key, entry in document.sections["transient"].items()}))

    config = ScenarioConfig(scenario, mismatch, sweep, transient, preset)
    logger.debug(f"Parsed scenario (preset {preset}, k = {scenario.coupling})")
    return config


def _looks_like_path(source: str) -> bool:
    if "\n" in source:
        return False
    return Path(source).is_file() or bool(source.strip()) and "=" not in source


def parse_scenario(source: Union[str, Path, None] = None) -> ScenarioConfig:
    """
    Parse a scenario from a path or from text.

    A Path, a string naming an existing file, or a non-blank single line with
    no '=' is read from disk; any other string is parsed as scenario text.
    None gives the default preset.

    Raises:
        ScenarioParseError: malformed syntax or an invariant violation, with the
            line; also an unreadable or missing file
        UnknownKeyError: a key or section no part of the format defines
    """
    if source is None:
        return parse_scenario_text("")
    if isinstance(source, Path) or _looks_like_path(source):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ScenarioParseError(f"cannot read scenario file {path}: {e}") from e
        logger.info(f"Reading scenario {path}")
        return parse_scenario_text(text)
    return parse_scenario_text(source)


def _fmt(value) -> str:
    # repr keeps full float precision so parsing gives the same value back
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(config: ScenarioConfig) -> str:
    """Write a configuration in the scenario format, every value explicit"""
    s = config.scenario
    values = {
        "primary_coil": {"inductance": s.primary_coil.inductance,
                         "series_resistance": s.primary_coil.series_resistance},
        "secondary_coil": {"inductance": s.secondary_coil.inductance,
                           "series_resistance": s.secondary_coil.series_resistance},
        "primary_tank": {"c_s1": s.primary_tank.c_s1,
                         "source_amplitude": s.primary_tank.source_amplitude,
                         "drive_frequency": s.primary_tank.drive_frequency},
        "secondary_tank": {"c_s2": s.secondary_tank.c_s2, "c_p": s.secondary_tank.c_p,
                           "r_load": s.secondary_tank.r_load, "r_sw": s.secondary_tank.r_sw},
        "link": {"coupling": s.coupling},
        "mismatch": {"c_p_override": config.mismatch.c_p_override,
                     "c_s1_relative_error": config.mismatch.c_s1_relative_error},
        "sweep": {"k_min": config.sweep.k_min, "k_max": config.sweep.k_max,
                  "points": config.sweep.points, "scale": config.sweep.scale.value},
        "transient": {"time_step": config.transient.time_step,
                      "duration": config.transient.duration,
                      "bit_period": config.transient.bit_period,
                      "sw_pattern": format_pattern(config.transient.sw_pattern),
                      "settle_time": config.transient.settle_time,
                      "sample_fraction": config.transient.sample_fraction},
    }
    lines = [f"preset = {config.preset}"]
    for section, entries in values.items():
        lines.append("")
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {_fmt(value)}" for key, value in entries.items())
    return "\n".join(lines) + "\n"
