"""
Exception hierarchy for coillink.

Input problems derive from ValueError and numerical failures from RuntimeError,
so callers that only catch builtins still see them.
"""
from typing import Optional


class CoilLinkError(Exception):
    """Base class for every error raised by the package"""


class ValidationError(CoilLinkError, ValueError):
    """A value violates a domain-type invariant"""


class DomainError(ValidationError):
    """A formula received an input outside its mathematical domain"""


class ScenarioParseError(ValidationError):
    """Malformed scenario text"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ScenarioParseError):
    """A scenario key that no section owns, or that several sections own"""

    def __init__(self, key: str, line: Optional[int] = None, reason: str = "unknown key"):
        self.key = key
        super().__init__(f"{reason} '{key}'", line)


class ComputationError(CoilLinkError, RuntimeError):
    """A computation could not produce a finite, meaningful result"""


class NoRealResonanceError(ComputationError):
    """C·R_L² ≤ L: the loaded parallel tank has no real resonance"""


class DegenerateImpedanceError(ComputationError):
    """The primary impedance magnitude underflowed"""


class UnsolvableError(ComputationError):
    """The detune search range holds no flip-free primary capacitor"""


class InstabilityError(ComputationError):
    """A transient state blew up, usually from a bad time step"""


class InsufficientDataError(ComputationError):
    """Not enough samples for the requested reduction"""


class IndeterminateError(ComputationError):
    """The envelope carries no decodable LSK modulation"""


class StudyStepError(ComputationError):
    """A reproduction study step failed or was skipped"""
