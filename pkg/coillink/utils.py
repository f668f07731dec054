import math
import numbers
import re
from typing import Iterable, Optional

from .errors import ComputationError, DomainError, UnknownKeyError

SI_PREFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,
    "m": 1e-3,
    "": 1.0,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
}
UNIT_SUFFIXES = ("", "F", "H", "Hz", "s", "V", "A", "ohm", "Ω")

_NUMBER_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([fpnuµmkMG]?)\s*([A-Za-zΩ]*)\s*$"
)


def parse_si(text: str) -> float:
    """Parse a number with an optional SI prefix and unit, e.g. '12p', '40.68MHz', '12.5k'."""
    match = _NUMBER_RE.match(text)
    if not match:
        raise ValueError(f"not a number: {text!r}")
    number, prefix, unit = match.groups()
    if unit not in UNIT_SUFFIXES:
        raise ValueError(f"unknown unit suffix {unit!r} in {text!r}")
    value = float(number) * SI_PREFIXES[prefix]
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def format_number(value: float, digits: int = 10) -> str:
    """Fixed significant-digit formatting used by every CSV writer"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value == 0.0:
        return "0"
    return f"{value:.{digits}g}"


def validate_keys(keys: Iterable[str], allowed_keys: Iterable[str], line: Optional[int] = None,
                  where: Optional[str] = None, reason: str = "unknown key"):
    """Reject keys outside allowed_keys, naming the first offender and its line."""
    allowed = set(allowed_keys)
    unknown = [key for key in keys if key not in allowed]
    if unknown:
        raise UnknownKeyError(f"{where}.{unknown[0]}" if where else unknown[0], line, reason=reason)
    return True


def require_positive(name: str, value: float):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")


def require_non_negative(name: str, value: float):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value >= 0):
        raise DomainError(f"{name} must be a finite non-negative number, got {value!r}")


def require_range(name: str, value: float, low: float, high: float,
                  high_inclusive: bool = False, low_inclusive: bool = True):
    """Check low ≤ value < high (inclusivity configurable)."""
    ok = isinstance(value, numbers.Real) and math.isfinite(value)
    if ok:
        ok = (value >= low) if low_inclusive else (value > low)
    if ok:
        ok = (value <= high) if high_inclusive else (value < high)
    if not ok:
        lo = "[" if low_inclusive else "("
        hi = "]" if high_inclusive else ")"
        raise DomainError(f"{name} must lie in {lo}{low}, {high}{hi}, got {value!r}")


def require_finite(name: str, value: complex, error: Optional[type] = None):
    """Raise when a real or complex result is NaN or infinite."""
    parts = (value.real, value.imag) if isinstance(value, complex) else (value,)
    if not all(math.isfinite(p) for p in parts):
        raise (error or ComputationError)(f"{name} is not finite: {value!r}")
