"""
📐 Step functions on [0, 1]
===========================

Simple functions with exact rational breakpoints and float values. Piece i
occupies [ends[i-1], ends[i]) with ends[-1] == 1 and an implicit start at 0.

All pointwise operations work on the common refinement of breakpoints and
return canonical functions (no two adjacent pieces share a value).
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from ..constants import BRACKET_CAP, DEFAULT_TOL
from .errors import NumericalOverflowError, PreconditionError
from .orlicz import OrliczFunction

logger = logging.getLogger("orliczlab.simplefn")

Rational = Union[Fraction, int, float, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value: Rational, param: str = "breakpoint") -> Fraction:
    """Exact conversion; floats convert to their exact binary value."""
    try:
        result = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise PreconditionError(param, f"not a rational number: {value!r}")
    return result


def _clean(value: float) -> float:
    value = float(value)
    return 0.0 if value == 0.0 else value


@dataclass(frozen=True)
class SimpleFunction:
    """Step function sum_i values[i] * chi[ends[i-1], ends[i])."""

    ends: Tuple[Fraction, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.ends or len(self.ends) != len(self.values):
            raise PreconditionError("pieces", "need one value per breakpoint and at least one piece")
        previous = ZERO
        for end in self.ends:
            if not isinstance(end, Fraction):
                raise PreconditionError("pieces", "breakpoints must be Fractions")
            if not end > previous:
                raise PreconditionError("pieces", f"breakpoints must increase strictly ({previous} then {end})")
            previous = end
        if self.ends[-1] != ONE:
            raise PreconditionError("pieces", f"the last breakpoint must be 1, got {self.ends[-1]}")
        for a, b in zip(self.values, self.values[1:]):
            if a == b:
                raise PreconditionError("pieces", "adjacent pieces share a value; use from_pieces")
        if not all(math.isfinite(v) for v in self.values):
            raise PreconditionError("values", "values must be finite")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    @classmethod
    def from_pieces(cls, pieces: Iterable[Tuple[Rational, float]]) -> "SimpleFunction":
        """Build a canonical function from (breakpoint_end, value) pairs.

        Adjacent equal values are merged and -0.0 becomes 0.0.
        """
        ends: List[Fraction] = []
        values: List[float] = []
        for end, value in pieces:
            end = as_fraction(end)
            value = _clean(value)
            if values and values[-1] == value:
                ends[-1] = end
            else:
                ends.append(end)
                values.append(value)
        return cls(tuple(ends), tuple(values))

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[Any]]) -> "SimpleFunction":
        """Parse the ``[numerator, denominator, value]`` serialization."""
        pieces = []
        for triple in triples:
            if len(triple) != 3:
                raise PreconditionError("function", f"expected [num, den, value], got {triple!r}")
            num, den, value = triple
            if int(den) <= 0:
                raise PreconditionError("function", f"denominator must be positive, got {den}")
            pieces.append((Fraction(int(num), int(den)), float(value)))
        return cls.from_pieces(pieces)

    def to_triples(self) -> List[List[Any]]:
        return [[end.numerator, end.denominator, value] for end, value in zip(self.ends, self.values)]

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------
    @property
    def starts(self) -> Tuple[Fraction, ...]:
        return (ZERO,) + self.ends[:-1]

    @property
    def measures(self) -> Tuple[Fraction, ...]:
        return tuple(e - s for s, e in zip(self.starts, self.ends))

    def pieces(self) -> Iterator[Tuple[Fraction, Fraction, float]]:
        return zip(self.starts, self.ends, self.values)

    def measure_array(self) -> np.ndarray:
        return np.array([float(m) for m in self.measures])

    def value_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def is_zero(self) -> bool:
        return self.values == (0.0,)

    def sup_abs(self) -> float:
        return max(abs(v) for v in self.values)

    def value_at(self, x: Rational) -> float:
        x = as_fraction(x, "x")
        if not ZERO <= x < ONE:
            raise PreconditionError("x", f"must lie in [0, 1), got {x}")
        for end, value in zip(self.ends, self.values):
            if x < end:
                return value
        return self.values[-1]

    def support_measure(self) -> Fraction:
        return sum((m for m, v in zip(self.measures, self.values) if v != 0.0), ZERO)

    def integral(self) -> float:
        return math.fsum(v * float(m) for v, m in zip(self.values, self.measures))

    def __len__(self) -> int:
        return len(self.values)


def zero() -> SimpleFunction:
    return SimpleFunction((ONE,), (0.0,))


def constant(c: float) -> SimpleFunction:
    return SimpleFunction((ONE,), (_clean(c),))


def indicator(a: Rational, b: Rational, value: float = 1.0) -> SimpleFunction:
    """value * chi[a, b) for 0 <= a < b <= 1."""
    a, b = as_fraction(a), as_fraction(b)
    if not ZERO <= a < b <= ONE:
        raise PreconditionError("interval", f"need 0 <= a < b <= 1, got [{a}, {b})")
    pieces: List[Tuple[Fraction, float]] = []
    if a > ZERO:
        pieces.append((a, 0.0))
    pieces.append((b, value))
    if b < ONE:
        pieces.append((ONE, 0.0))
    return SimpleFunction.from_pieces(pieces)


# ----------------------------------------------------------------------
# Refinement and pointwise operations
# ----------------------------------------------------------------------
def refine(fs: Sequence[SimpleFunction]) -> Tuple[List[Fraction], List[List[float]]]:
    """Common refinement: merged ends and, per end, the value of each function."""
    ends = sorted(set().union(*(f.ends for f in fs)))
    columns: List[List[float]] = []
    pointers = [0] * len(fs)
    for end in ends:
        row = []
        for k, f in enumerate(fs):
            while f.ends[pointers[k]] < end:
                pointers[k] += 1
            row.append(f.values[pointers[k]])
        columns.append(row)
    return ends, columns


def combine(fs: Sequence[SimpleFunction], op: Callable[[List[float]], float]) -> SimpleFunction:
    """Pointwise op over the refinement of fs; op receives the value list."""
    if not fs:
        return zero()
    ends, rows = refine(fs)
    return SimpleFunction.from_pieces((end, op(row)) for end, row in zip(ends, rows))


def apply(f: SimpleFunction, fn: Callable[[float], float]) -> SimpleFunction:
    return SimpleFunction.from_pieces((end, fn(v)) for end, v in zip(f.ends, f.values))


def lattice_abs(f: SimpleFunction) -> SimpleFunction:
    return apply(f, abs)


def lattice_sup(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    return combine((f, g), max)


def lattice_inf(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    return combine((f, g), min)


def add(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    return combine((f, g), lambda row: row[0] + row[1])


def scale(c: float, f: SimpleFunction) -> SimpleFunction:
    c = float(c)
    return apply(f, lambda v: c * v)


def sup_all(fs: Sequence[SimpleFunction]) -> SimpleFunction:
    return combine(fs, max)


def sum_all(fs: Sequence[SimpleFunction], weights: Optional[Sequence[float]] = None) -> SimpleFunction:
    """Sum (optionally weighted) with compensated summation per piece."""
    if weights is None:
        return combine(fs, math.fsum)
    weights = [float(w) for w in weights]
    return combine(fs, lambda row: math.fsum(w * v for w, v in zip(weights, row)))


def pointwise_le(f: SimpleFunction, g: SimpleFunction, tol: float = 0.0, rel: bool = True) -> Optional[Tuple[Fraction, Fraction, float, float]]:
    """First interval where f > g beyond tolerance, else None.

    With ``rel`` the allowance is tol * max(1, |g|).
    """
    ends, rows = refine((f, g))
    start = ZERO
    for end, (fv, gv) in zip(ends, rows):
        allowance = tol * max(1.0, abs(gv)) if rel else tol
        if fv > gv + allowance:
            return start, end, fv, gv
        start = end
    return None


def max_abs_difference(f: SimpleFunction, g: SimpleFunction) -> float:
    _, rows = refine((f, g))
    return max(abs(a - b) for a, b in rows)


def supports_disjoint(f: SimpleFunction, g: SimpleFunction) -> bool:
    """Exact check that no piece carries nonzero values of both functions."""
    _, rows = refine((f, g))
    return all(a == 0.0 or b == 0.0 for a, b in rows)


# ----------------------------------------------------------------------
# Rearrangement and distribution
# ----------------------------------------------------------------------
def rearrange(f: SimpleFunction) -> SimpleFunction:
    """Decreasing rearrangement f* on [0, 1]."""
    pairs = sorted(zip((abs(v) for v in f.values), f.measures), key=lambda pair: -pair[0])
    pieces = []
    position = ZERO
    for value, measure in pairs:
        position += measure
        pieces.append((position, value))
    return SimpleFunction.from_pieces(pieces)


@dataclass(frozen=True)
class DistributionProfile:
    """Measures |{|f| > lambda}| at each distinct |value|, ascending."""

    thresholds: Tuple[float, ...]
    measures: Tuple[Fraction, ...]
    support: Fraction

    def measure_above(self, lam: float) -> Fraction:
        """|{|f| > lam}| for any lam >= 0."""
        index = bisect_right(self.thresholds, lam) - 1
        if index < 0:
            return ONE
        return self.measures[index]

    def rearranged_value(self, t: Rational) -> float:
        """f*(t) = inf{lam : |{|f| > lam}| <= t}."""
        t = as_fraction(t, "t")
        if t >= ONE:
            return 0.0
        for threshold, measure in zip(self.thresholds, self.measures):
            if measure <= t:
                return threshold
        return self.thresholds[-1]

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "measures": [f"{m.numerator}/{m.denominator}" for m in self.measures],
            "support": f"{self.support.numerator}/{self.support.denominator}",
        }


def distribution(f: SimpleFunction) -> DistributionProfile:
    magnitudes = [abs(v) for v in f.values]
    thresholds = tuple(sorted(set(magnitudes)))
    measures = tuple(
        sum((m for a, m in zip(magnitudes, f.measures) if a > lam), ZERO) for lam in thresholds
    )
    return DistributionProfile(thresholds, measures, f.support_measure())


# ----------------------------------------------------------------------
# Modular and Luxemburg norm
# ----------------------------------------------------------------------
def modular_from_arrays(phi: OrliczFunction, magnitudes: np.ndarray, weights: np.ndarray, lam: float = 1.0) -> float:
    terms = phi.values(magnitudes / lam) * weights
    return math.fsum(terms.tolist())


def modular(phi: OrliczFunction, f: SimpleFunction) -> float:
    """Integral of phi(|f|) over [0, 1], piece by piece."""
    return modular_from_arrays(phi, np.abs(f.value_array()), f.measure_array())


def heart_membership(phi: OrliczFunction, f: SimpleFunction, scales: Sequence[float] = (1.0, 10.0, 100.0)) -> bool:
    """Finite modular at every listed scale.

    phi is finite on [0, inf) and f takes finitely many finite values, so
    modular(phi, k * f) is a finite sum whenever k is finite. Decided from
    that structure; a float modular overflowing for fast-growing phi says
    nothing about membership.
    """
    del phi
    return all(math.isfinite(k) for k in scales) and all(math.isfinite(v) for v in f.values)


def luxemburg_norm(phi: OrliczFunction, f: SimpleFunction, tol: float = DEFAULT_TOL) -> float:
    """inf{lam > 0 : modular(phi, f / lam) <= 1} to within tol.

    Raises:
        NumericalOverflowError: if the bracket leaves [1/cap, cap]
    """
    if f.is_zero():
        if not tol > 0:
            raise PreconditionError("tol", f"must be positive, got {tol}")
        return 0.0
    return norm_from_arrays(phi, f.value_array(), f.measure_array(), tol)


def norm_from_arrays(phi: OrliczFunction, values: np.ndarray, weights: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm of the step function with these piece values and measures."""
    if not tol > 0:
        raise PreconditionError("tol", f"must be positive, got {tol}")
    magnitudes = np.abs(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if not np.any(magnitudes > 0):
        return 0.0

    def excess(lam: float) -> float:
        return modular_from_arrays(phi, magnitudes, weights, lam) - 1.0

    lam = float(np.max(magnitudes))
    if excess(lam) > 0:
        lo = lam
        hi = lam * 2.0
        while excess(hi) > 0:
            lo, hi = hi, hi * 2.0
            if hi > BRACKET_CAP:
                raise NumericalOverflowError("f", "norm bracket exceeded the hard cap")
    else:
        hi = lam
        lo = lam / 2.0
        while excess(lo) <= 0:
            hi, lo = lo, lo / 2.0
            if lo < 1.0 / BRACKET_CAP:
                raise NumericalOverflowError("f", "norm bracket fell below the hard floor")

    root = bisect(excess, lo, hi, xtol=tol, rtol=4.0 * np.finfo(float).eps, maxiter=2000)
    return float(root)


__all__ = [
    "SimpleFunction",
    "DistributionProfile",
    "as_fraction",
    "zero",
    "constant",
    "indicator",
    "refine",
    "combine",
    "apply",
    "lattice_abs",
    "lattice_sup",
    "lattice_inf",
    "add",
    "scale",
    "sup_all",
    "sum_all",
    "pointwise_le",
    "max_abs_difference",
    "supports_disjoint",
    "rearrange",
    "distribution",
    "modular",
    "heart_membership",
    "luxemburg_norm",
    "norm_from_arrays",
    "modular_from_arrays",
]
