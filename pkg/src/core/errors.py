"""
Error types raised by the OrliczLab core modules.

Every error names the offending parameter so the command line can report it
next to the exit code.
"""

from typing import Any, Dict


class OrliczLabError(Exception):
    """Base class for all core errors."""

    error_code = "ERROR"
    exit_code = 4

    def __init__(self, param: str, message: str, **context: Any):
        self.param = param
        self.message = message
        self.context: Dict[str, Any] = context
        super().__init__(f"{param}: {message}")


class DomainError(OrliczLabError, ValueError):
    """Argument outside the domain of the map (negative or non-finite)."""

    error_code = "DOMAIN_ERROR"
    exit_code = 3


class PreconditionError(OrliczLabError, ValueError):
    """A documented pre-condition of an operation does not hold."""

    error_code = "PRECONDITION_FAILED"
    exit_code = 3


class DegenerateInputError(OrliczLabError, ValueError):
    """The Orlicz function vanishes where the operation needs it positive."""

    error_code = "DEGENERATE_INPUT"
    exit_code = 3


class CapacityExceededError(OrliczLabError):
    """Realization measures do not fit into [0, 1]."""

    error_code = "CAPACITY_EXCEEDED"
    exit_code = 3


class UnstabilizedError(OrliczLabError):
    """Row limits of the b-table have not stabilized at the requested depth."""

    error_code = "UNSTABILIZED"
    exit_code = 3


class TailDominatedError(OrliczLabError):
    """The truncated tail keeps too little of S_n for a meaningful bound."""

    error_code = "TAIL_DOMINATED"
    exit_code = 3


class SearchExhaustedError(OrliczLabError):
    """No admissible step height was found below the search cap."""

    error_code = "SEARCH_EXHAUSTED"
    exit_code = 2


class PremiseNotMetError(OrliczLabError):
    """The modular lower bound is too small to conclude a norm bound."""

    error_code = "PREMISE_NOT_MET"
    exit_code = 2


class InvariantViolationError(OrliczLabError):
    """A property that must hold by construction failed on computed data."""

    error_code = "INVARIANT_VIOLATION"
    exit_code = 2


class NumericalOverflowError(OrliczLabError, ArithmeticError):
    """Bracket expansion ran past the hard cap."""

    error_code = "NUMERICAL_OVERFLOW"
    exit_code = 4


__all__ = [
    "OrliczLabError",
    "DomainError",
    "PreconditionError",
    "DegenerateInputError",
    "CapacityExceededError",
    "UnstabilizedError",
    "TailDominatedError",
    "SearchExhaustedError",
    "PremiseNotMetError",
    "InvariantViolationError",
    "NumericalOverflowError",
]
