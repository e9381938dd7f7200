#!/usr/bin/env python3
"""
🛡️ Input Validation Module for OrliczLab
Parses command-line values before they reach the pydantic run schema:
- Positive numbers and counts
- Rationals ("p/q")
- Number lists ("1,2,5")
- Step functions ("1/2:3,1:0")
- Piecewise-linear knots ("0:0,1:2,2:3")
- JSON documents (run configs, certificates)
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Union


@dataclass
class ValidationResult:
    """Result of input validation with value and error details."""
    is_valid: bool
    value: Any = None
    error: str = ""
    field_name: str = ""


class InputValidator:
    """Centralized validation for command-line inputs."""

    MAX_LIST_LENGTH = 10_000
    MAX_DOCUMENT_BYTES = 64 * 1024 * 1024

    @classmethod
    def validate_number(
        cls,
        value: Union[str, float, int, None],
        field_name: str,
        minimum: Optional[float] = None,
        strict: bool = False,
    ) -> ValidationResult:
        """Validate a finite real, optionally bounded below.

        Args:
            value: Raw value
            field_name: Name of the field for error messages
            minimum: Lower bound
            strict: Whether the bound itself is excluded
        """
        if value is None:
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        try:
            number = float(value)
        except (ValueError, TypeError):
            return ValidationResult(False, None, f"{field_name} must be a number, got {value!r}", field_name)
        if not math.isfinite(number):
            return ValidationResult(False, None, f"{field_name} must be finite", field_name)
        if minimum is not None:
            if strict and not number > minimum:
                return ValidationResult(False, None, f"{field_name} must be > {minimum:g}", field_name)
            if not strict and number < minimum:
                return ValidationResult(False, None, f"{field_name} must be >= {minimum:g}", field_name)
        return ValidationResult(True, number, "", field_name)

    @classmethod
    def validate_count(cls, value: Union[str, int, None], field_name: str, minimum: int = 1) -> ValidationResult:
        """Validate an integer count >= minimum."""
        if value is None:
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        if isinstance(value, bool):
            return ValidationResult(False, None, f"{field_name} must be an integer", field_name)
        try:
            text = str(value).strip()
            count = int(float(text)) if "e" in text.lower() else int(text)
        except (ValueError, TypeError):
            return ValidationResult(False, None, f"{field_name} must be an integer, got {value!r}", field_name)
        if count < minimum:
            return ValidationResult(False, None, f"{field_name} must be >= {minimum}", field_name)
        return ValidationResult(True, count, "", field_name)

    @classmethod
    def validate_rational(cls, value: Union[str, int, None], field_name: str) -> ValidationResult:
        """Validate an exact rational such as "3/8" or "1"."""
        if value is None or str(value).strip() == "":
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        try:
            fraction = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            return ValidationResult(False, None, f"{field_name} must be a rational p/q, got {value!r}", field_name)
        return ValidationResult(True, fraction, "", field_name)

    @classmethod
    def validate_number_list(
        cls, value: Optional[str], field_name: str, integer: bool = False, minimum: Optional[float] = None
    ) -> ValidationResult:
        """Validate a comma separated list of numbers."""
        if value is None or not str(value).strip():
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        items = [item.strip() for item in str(value).split(",") if item.strip()]
        if len(items) > cls.MAX_LIST_LENGTH:
            return ValidationResult(False, None, f"{field_name} has too many entries", field_name)
        parsed: List[Union[int, float]] = []
        for item in items:
            if integer:
                result = cls.validate_count(item, field_name, int(minimum) if minimum is not None else 0)
            else:
                result = cls.validate_number(item, field_name, minimum)
            if not result.is_valid:
                return result
            parsed.append(result.value)
        return ValidationResult(True, parsed, "", field_name)

    @classmethod
    def validate_step_function(cls, value: Optional[str], field_name: str = "function") -> ValidationResult:
        """Parse "end:value,..." into ``[numerator, denominator, value]`` triples.

        Ends are rationals, increasing, the last one equal to 1.
        """
        if value is None or not str(value).strip():
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        triples = []
        previous = Fraction(0)
        for item in str(value).split(","):
            end_text, sep, value_text = item.strip().partition(":")
            if not sep:
                return ValidationResult(False, None, f"{field_name} pieces must look like end:value, got {item!r}", field_name)
            end = cls.validate_rational(end_text, field_name)
            if not end.is_valid:
                return end
            height = cls.validate_number(value_text, field_name)
            if not height.is_valid:
                return height
            if not end.value > previous:
                return ValidationResult(False, None, f"{field_name} breakpoints must increase, got {end.value}", field_name)
            previous = end.value
            triples.append([end.value.numerator, end.value.denominator, height.value])
        if previous != 1:
            return ValidationResult(False, None, f"{field_name} must end at breakpoint 1, got {previous}", field_name)
        return ValidationResult(True, triples, "", field_name)

    @classmethod
    def validate_knots(cls, value: Optional[str], field_name: str = "knots") -> ValidationResult:
        """Parse "x:y,x:y,..." into ``[[x, y], ...]``; structure is checked by the Orlicz layer."""
        if value is None or not str(value).strip():
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        knots = []
        for item in str(value).split(","):
            x_text, sep, y_text = item.strip().partition(":")
            if not sep:
                return ValidationResult(False, None, f"{field_name} entries must look like x:y, got {item!r}", field_name)
            x = cls.validate_number(x_text, field_name, 0.0)
            y = cls.validate_number(y_text, field_name)
            for result in (x, y):
                if not result.is_valid:
                    return result
            knots.append([x.value, y.value])
        return ValidationResult(True, knots, "", field_name)

    @classmethod
    def validate_json_document(cls, value: Optional[str], field_name: str) -> ValidationResult:
        """Load a JSON document from a file path."""
        if not value:
            return ValidationResult(False, None, f"{field_name} is required", field_name)
        path = Path(value)
        if not path.is_file():
            return ValidationResult(False, None, f"{field_name}: no such file {value!r}", field_name)
        if path.stat().st_size > cls.MAX_DOCUMENT_BYTES:
            return ValidationResult(False, None, f"{field_name}: file too large", field_name)
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            return ValidationResult(False, None, f"{field_name}: invalid JSON ({e})", field_name)
        except OSError as e:
            return ValidationResult(False, None, f"{field_name}: cannot read file ({e})", field_name)
        return ValidationResult(True, document, "", field_name)


class ValidationError(Exception):
    """Exception raised when input validation fails."""

    exit_code = 3
    error_code = "INVALID_INPUT"

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        self.message = message
        super().__init__(f"{field_name}: {message}")


def require(result: ValidationResult) -> Any:
    """Return the cleaned value or raise ValidationError."""
    if not result.is_valid:
        raise ValidationError(result.field_name, result.error)
    return result.value
