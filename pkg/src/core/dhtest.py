"""
🧮 Eligible sequences and the (dH) series test
==============================================

An eligible sequence is a list of blocks (F_n, w) of positive values with
exact rational weights summing to 1, separated so that max F_n < min F_{n+1}.
For an Orlicz function phi it yields the table

    b_{n,m} = sum_{t in F_n} w_t * m * phi(t / m) / phi(t),

nonincreasing in m with b_{n,1} = 1. Row limits b_m feed the series
sum_m b_m / m, whose convergence for every eligible sequence characterizes
property (dH). Blocks realize as disjoint unit-modular step functions
f_n = sum_t t * chi_{A_t} with |A_t| = w_t / phi(t).

Everything here is finite truncation: the verdicts report consistency with
the limit criteria, never the limits themselves.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..constants import (
    CONVERGENCE_EXPONENT,
    DEFAULT_TOL,
    DIVERGENCE_FLOOR,
    FLAT_TREND_RTOL,
    MAX_DENOMINATOR,
    MONOTONE_SLACK,
    STAB_TOL,
    WEAK_NULL_EPS,
)
from ..utils.logger import log_structured
from .errors import (
    CapacityExceededError,
    DegenerateInputError,
    InvariantViolationError,
    NumericalOverflowError,
    PreconditionError,
    UnstabilizedError,
)
from .orlicz import OrliczFunction
from .simplefn import ONE, ZERO, SimpleFunction, luxemburg_norm, modular, sum_all

logger = logging.getLogger("orliczlab.dhtest")

GROWTH_NOTE = (
    "min F_n -> infinity is a limit property; only strictly increasing "
    "block minima of the stored blocks are checked"
)
TRUNCATION_NOTE = (
    "finite truncation: the table supports or refutes the limit criterion "
    "on the computed range only"
)


# ----------------------------------------------------------------------
# Eligible sequences
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Block:
    """Values of F_n in increasing order and their exact weights."""

    values: Tuple[float, ...]
    weights: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.values or len(self.values) != len(self.weights):
            raise PreconditionError("blocks", "a block needs one weight per value and at least one value")
        values = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise PreconditionError("blocks", f"block values must be finite and positive, got {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise PreconditionError("blocks", f"block values must be distinct and increasing, got {values}")
        try:
            weights = tuple(Fraction(w) for w in self.weights)
        except (TypeError, ValueError, ZeroDivisionError):
            raise PreconditionError("weights", f"weights must be rationals, got {self.weights}")
        if not all(w > 0 for w in weights):
            raise PreconditionError("weights", "weights must be positive")
        if sum(weights) != ONE:
            raise PreconditionError("weights", f"weights must sum to exactly 1, got {sum(weights)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def singleton(cls, t: float) -> "Block":
        return cls((t,), (ONE,))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "values": list(self.values),
            "weights": [f"{w.numerator}/{w.denominator}" for w in self.weights],
        }


@dataclass(frozen=True)
class EligibleSequence:
    blocks: Tuple[Block, ...]
    label: str = "explicit"
    note: str = GROWTH_NOTE

    def __post_init__(self) -> None:
        for n, (prev, cur) in enumerate(zip(self.blocks, self.blocks[1:]), start=1):
            if not prev.values[-1] < cur.values[0]:
                raise PreconditionError(
                    "blocks",
                    f"blocks {n} and {n + 1} are not separated: max F_{n} = {prev.values[-1]:g} "
                    f">= min F_{n + 1} = {cur.values[0]:g}",
                )

    def __len__(self) -> int:
        return len(self.blocks)

    def head(self, count: int) -> Tuple[Block, ...]:
        if count > len(self.blocks):
            raise PreconditionError("blocks", f"sequence {self.label!r} has {len(self.blocks)} blocks, need {count}")
        return self.blocks[:count]

    def to_records(self) -> List[Dict[str, Any]]:
        return [block.to_dict() for block in self.blocks]

    # ------------------------------------------------------------------
    # Factories
    # ------------------------------------------------------------------
    @classmethod
    def from_records(cls, records: Sequence[Mapping[str, Any]], label: str = "explicit") -> "EligibleSequence":
        """Parse ``[{values: [...], weights: ["p/q", ...]}, ...]``."""
        blocks = []
        for i, record in enumerate(records, start=1):
            try:
                values = record["values"]
                weights = record.get("weights") or [f"1/{len(values)}"] * len(values)
            except (KeyError, TypeError, AttributeError):
                raise PreconditionError("blocks", f"block {i} must be an object with 'values' and 'weights'")
            blocks.append(Block(tuple(values), tuple(weights)))
        return cls(tuple(blocks), label)

    @classmethod
    def singleton_powers(cls, count: int, base: float = 2.0) -> "EligibleSequence":
        """F_n = {base^n} with weight 1."""
        return cls(tuple(Block.singleton(base**n) for n in range(1, count + 1)), "singleton-powers")

    @classmethod
    def geometric_blocks(cls, count: int) -> "EligibleSequence":
        """F_n = {4^n, 2 * 4^n} with weights 1/2."""
        half = Fraction(1, 2)
        return cls(
            tuple(Block((4.0**n, 2.0 * 4.0**n), (half, half)) for n in range(1, count + 1)),
            "geometric-blocks",
        )

    @classmethod
    def seeded(cls, seed: int, count: int, max_size: int = 3) -> "EligibleSequence":
        """Random separated blocks with small-integer weights; reproducible from the seed."""
        rng = np.random.default_rng(seed)
        blocks = []
        floor = 1.0
        for _ in range(count):
            size = int(rng.integers(1, max_size + 1))
            start = floor * float(rng.uniform(1.1, 3.0))
            values = np.cumsum(np.concatenate([[start], start * rng.uniform(0.1, 1.0, size=size - 1)]))
            raw = rng.integers(1, 10, size=size)
            total = int(raw.sum())
            blocks.append(Block(tuple(float(v) for v in values), tuple(Fraction(int(r), total) for r in raw)))
            floor = float(values[-1])
        return cls(tuple(blocks), f"seeded(seed={seed})")


BUILTIN_SEQUENCES = ("singleton-powers", "geometric-blocks", "seeded")


def builtin_sequence(name: str, count: int, seed: Optional[int] = None) -> EligibleSequence:
    if name == "singleton-powers":
        return EligibleSequence.singleton_powers(count)
    if name == "geometric-blocks":
        return EligibleSequence.geometric_blocks(count)
    if name == "seeded":
        if seed is None:
            raise PreconditionError("seed", "the seeded eligible sequence needs a seed")
        return EligibleSequence.seeded(seed, count)
    raise PreconditionError("blocks", f"unknown builtin sequence {name!r}; expected one of {BUILTIN_SEQUENCES}")


# ----------------------------------------------------------------------
# b-table
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BnmTable:
    """b_{n,m} for n <= N, m <= M (``values[n-1, m-1]``) with row-limit estimates."""

    values: np.ndarray = field(repr=False)
    limits: Tuple[float, ...]
    stabilized: Tuple[bool, ...]
    stab_tol: float
    note: str = TRUNCATION_NOTE

    @property
    def N(self) -> int:
        return int(self.values.shape[0])

    @property
    def M(self) -> int:
        return int(self.values.shape[1])

    def b(self, n: int, m: int) -> float:
        return float(self.values[n - 1, m - 1])

    @property
    def all_stabilized(self) -> bool:
        return all(self.stabilized)

    def to_rows(self) -> List[Dict[str, Any]]:
        """One row per n, one column per m."""
        return [
            {"n": n, **{str(m): float(self.values[n - 1, m - 1]) for m in range(1, self.M + 1)}}
            for n in range(1, self.N + 1)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "M": self.M,
            "table": self.values.tolist(),
            "limits": list(self.limits),
            "stabilized": list(self.stabilized),
            "stab_tol": self.stab_tol,
            "note": self.note,
        }


def _block_rows(phi: OrliczFunction, block: Block, ms: np.ndarray, n: int) -> np.ndarray:
    ts = np.array(block.values)
    phi_t = phi.values(ts)
    if np.any(phi_t == 0):
        t = float(ts[np.flatnonzero(phi_t == 0)[0]])
        raise DegenerateInputError("phi", f"phi({t:g}) = 0 in block {n}")
    if not np.all(np.isfinite(phi_t)):
        raise NumericalOverflowError("blocks", f"phi overflows on block {n}")
    with np.errstate(over="ignore", invalid="ignore"):
        ratios = ms[None, :] * phi.values(ts[:, None] / ms[None, :]) / phi_t[:, None]
    if len(block.values) == 1:
        return ratios[0]
    # integer numerators over a common denominator keep b_{n,1} == 1 exact
    denominator = math.lcm(*(w.denominator for w in block.weights))
    numerators = np.array([float(w * denominator) for w in block.weights])
    return (numerators @ ratios) / denominator


def b_table(
    phi: OrliczFunction,
    seq: EligibleSequence,
    N: int,
    M: int,
    stab_tol: float = STAB_TOL,
) -> BnmTable:
    """Full b_{n,m} table with monotonicity asserted and row limits estimated.

    b_m is estimated as b_{N,m}, flagged stable when it differs from
    b_{N//2,m} by less than stab_tol.

    Raises:
        DegenerateInputError: phi(t) = 0 for a stored t
        InvariantViolationError: a row increases in m beyond float slack
    """
    if int(N) < 1 or int(M) < 1:
        raise PreconditionError("N", f"need N >= 1 and M >= 1, got N={N}, M={M}")
    blocks = seq.head(int(N))
    ms = np.arange(1, int(M) + 1, dtype=float)
    values = np.vstack([_block_rows(phi, block, ms, n) for n, block in enumerate(blocks, start=1)])

    rises = values[:, 1:] > values[:, :-1] * (1.0 + MONOTONE_SLACK)
    if np.any(rises):
        n, m = (int(x) + 1 for x in np.argwhere(rises)[0])
        raise InvariantViolationError("phi", f"b_(n,m) increases from m={m} to m={m + 1} at n={n}; is phi convex?")

    top = values[-1]
    reference = values[max(1, int(N) // 2) - 1]
    stabilized = tuple(bool(x) for x in np.abs(top - reference) < stab_tol)
    log_structured(
        logger, logging.INFO, "b-table built",
        phi=phi.label, seq=seq.label, N=int(N), M=int(M), stabilized=sum(stabilized),
    )
    return BnmTable(values, tuple(float(x) for x in top), stabilized, float(stab_tol))


# ----------------------------------------------------------------------
# Weak-null criterion
# ----------------------------------------------------------------------
class WeakNullVerdict(str, Enum):
    CONSISTENT = "consistent-with-weakly-null"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class WeakNullReport:
    verdict: WeakNullVerdict
    eps: float
    quadrant_max: Optional[float]
    quadrant_min: Optional[float]
    note: str = TRUNCATION_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "eps": self.eps,
            "quadrant_max": self.quadrant_max,
            "quadrant_min": self.quadrant_min,
            "note": self.note,
        }


def weak_null_criterion(table: BnmTable, eps: float = WEAK_NULL_EPS) -> WeakNullReport:
    """Read the double limit of b_{n,m} off the quadrant n > N/2, m > M/2."""
    if table.values.size == 0:
        raise PreconditionError("table", "empty b-table")
    quadrant = table.values[table.N // 2:, table.M // 2:]
    if table.N < 2 or table.M < 2 or quadrant.size == 0:
        return WeakNullReport(WeakNullVerdict.INCONCLUSIVE, eps, None, None)

    q_max, q_min = float(np.max(quadrant)), float(np.min(quadrant))
    if q_max < eps:
        verdict = WeakNullVerdict.CONSISTENT
    else:
        first, last = quadrant[:, 0], quadrant[:, -1]
        flat = bool(np.all(np.abs(first - last) <= FLAT_TREND_RTOL * np.abs(first)))
        verdict = WeakNullVerdict.REFUTED if q_min >= eps and flat else WeakNullVerdict.INCONCLUSIVE
    return WeakNullReport(verdict, eps, q_max, q_min)


# ----------------------------------------------------------------------
# Series test
# ----------------------------------------------------------------------
class SeriesVerdict(str, Enum):
    CONVERGENT = "convergent-trend"
    DIVERGENT = "divergent-trend"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DHSeriesReport:
    M: int
    limits: Tuple[float, ...] = field(repr=False)
    partial_sums: Tuple[float, ...] = field(repr=False)
    harmonic_sums: Tuple[float, ...] = field(repr=False)
    verdict: SeriesVerdict
    decay_exponent: float
    max_harmonic_deviation: float
    extrapolated_limit: Optional[float]
    note: str = TRUNCATION_NOTE

    @property
    def partial_sum(self) -> float:
        return self.partial_sums[-1]

    def to_records(self) -> List[Dict[str, Any]]:
        return [
            {
                "m": m,
                "b_m": self.limits[m - 1],
                "increment": self.limits[m - 1] / m,
                "partial_sum": self.partial_sums[m - 1],
                "harmonic_sum": self.harmonic_sums[m - 1],
            }
            for m in range(1, self.M + 1)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "M": self.M,
            "verdict": self.verdict.value,
            "partial_sum": self.partial_sum,
            "harmonic_sum": self.harmonic_sums[-1],
            "decay_exponent": self.decay_exponent,
            "max_harmonic_deviation": self.max_harmonic_deviation,
            "extrapolated_limit": self.extrapolated_limit,
            "note": self.note,
        }


def series_from_limits(limits: Sequence[float]) -> DHSeriesReport:
    """Partial sums of b_m / m with harmonic and power-decay comparisons."""
    b = np.asarray(limits, dtype=float)
    M = b.size
    ms = np.arange(1, M + 1, dtype=float)
    increments = b / ms
    partial = np.cumsum(increments)
    harmonic = np.cumsum(1.0 / ms)

    tail = slice(M // 2, M)
    exponent = math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        if M >= 4 and np.all(increments[tail] > 0):
            exponent = float(-np.polyfit(np.log(ms[tail]), np.log(increments[tail]), 1)[0])

    extrapolated = None
    if M >= 4 and bool(np.all(b[tail] >= DIVERGENCE_FLOOR)):
        verdict = SeriesVerdict.DIVERGENT
    elif math.isfinite(exponent) and exponent > CONVERGENCE_EXPONENT:
        verdict = SeriesVerdict.CONVERGENT
        # tail of c m^-s beyond M, with c fitted at the last increment
        extrapolated = float(partial[-1] + increments[-1] * M / (exponent - 1.0))
    else:
        verdict = SeriesVerdict.INCONCLUSIVE

    deviation = float(np.max(np.abs(increments - 1.0 / ms))) if M else 0.0
    return DHSeriesReport(
        M=M,
        limits=tuple(b.tolist()),
        partial_sums=tuple(partial.tolist()),
        harmonic_sums=tuple(harmonic.tolist()),
        verdict=verdict,
        decay_exponent=exponent,
        max_harmonic_deviation=deviation,
        extrapolated_limit=extrapolated,
    )


def dh_series_test(
    phi: OrliczFunction,
    seq: EligibleSequence,
    N: int,
    M: int,
    stab_tol: float = STAB_TOL,
) -> DHSeriesReport:
    """Series sum_{m<=M} b_m / m from a stabilized b-table.

    Raises:
        UnstabilizedError: some b_m has not stabilized at depth N
    """
    table = b_table(phi, seq, N, M, stab_tol)
    if not table.all_stabilized:
        m = table.stabilized.index(False) + 1
        raise UnstabilizedError(
            "N", f"b_m has not stabilized at m={m} with N={N}; rerun with a larger N",
            m=m,
        )
    report = series_from_limits(table.limits)
    log_structured(
        logger, logging.INFO, "dH series test",
        phi=phi.label, seq=seq.label, M=int(M), verdict=report.verdict.value, partial_sum=report.partial_sum,
    )
    return report


# ----------------------------------------------------------------------
# Realization as disjoint functions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Realization:
    functions: Tuple[SimpleFunction, ...]
    measures: Tuple[Tuple[Fraction, ...], ...]
    used_measure: Fraction
    rounding_error: float
    norm_tol: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K": len(self.functions),
            "functions": [f.to_triples() for f in self.functions],
            "measures": [[f"{m.numerator}/{m.denominator}" for m in row] for row in self.measures],
            "used_measure": f"{self.used_measure.numerator}/{self.used_measure.denominator}",
            "rounding_error": self.rounding_error,
            "norm_tol": self.norm_tol,
        }


def realize(
    phi: OrliczFunction,
    seq: EligibleSequence,
    K: int,
    max_denominator: int = MAX_DENOMINATOR,
    tol: float = DEFAULT_TOL,
) -> Realization:
    """Pack the sets A_t, |A_t| = w_t / phi(t), left to right in [0, 1].

    Measures are rounded to rationals with denominator <= max_denominator;
    the largest relative rounding enters ``norm_tol``.

    Raises:
        CapacityExceededError: the measures of blocks 1..K exceed 1
    """
    if int(K) < 0:
        raise PreconditionError("K", f"must be >= 0, got {K}")
    blocks = seq.head(int(K))
    functions: List[SimpleFunction] = []
    measures: List[Tuple[Fraction, ...]] = []
    position = ZERO
    worst = 0.0

    for n, block in enumerate(blocks, start=1):
        row = []
        pieces: List[Tuple[Fraction, float]] = [(position, 0.0)] if position > ZERO else []
        for t, w in zip(block.values, block.weights):
            phi_t = float(phi.values(t))
            if phi_t == 0:
                raise DegenerateInputError("phi", f"phi({t:g}) = 0 in block {n}")
            if not math.isfinite(phi_t):
                raise NumericalOverflowError("blocks", f"phi({t:g}) overflows in block {n}")
            exact = w / Fraction(phi_t)
            mu = exact.limit_denominator(max_denominator)
            if mu == 0:
                raise DegenerateInputError("blocks", f"|A_t| for t={t:g} in block {n} rounds to 0")
            worst = max(worst, abs(float(mu / exact - 1)))
            if position + mu > ONE:
                log_structured(logger, logging.ERROR, "capacity exceeded", block=n, used=float(position + mu))
                raise CapacityExceededError(
                    "blocks", f"block {n} does not fit: measures reach {float(position + mu):.6g} > 1",
                    block=n,
                )
            position += mu
            pieces.append((position, t))
            row.append(mu)
        if position < ONE:
            pieces.append((ONE, 0.0))
        functions.append(SimpleFunction.from_pieces(pieces))
        measures.append(tuple(row))

    norm_tol = worst + 2.0 * tol
    if worst:
        log_structured(logger, logging.INFO, "measure rounding", K=int(K), max_relative=worst, norm_tol=norm_tol)
    return Realization(tuple(functions), tuple(measures), position, worst, norm_tol)


def realized_norms(phi: OrliczFunction, realization: Realization, tol: float = DEFAULT_TOL) -> List[float]:
    return [luxemburg_norm(phi, f, tol) for f in realization.functions]


# ----------------------------------------------------------------------
# Series identity
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CrossCheckReport:
    K: int
    scale: int
    lhs: float
    rhs: float
    difference: float
    allowance: float
    agrees: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K": self.K,
            "scale": self.scale,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "difference": self.difference,
            "allowance": self.allowance,
            "agrees": self.agrees,
        }


def cross_check_series_identity(
    phi: OrliczFunction,
    seq: EligibleSequence,
    K: int,
    scale: int = 1,
    max_denominator: int = MAX_DENOMINATOR,
    tol: float = 1e-9,
) -> CrossCheckReport:
    """Compare the modular of sum_n f_n / (C n) with sum_n b_{n,Cn} / (C n), C = scale.

    The left side is computed on the realized disjoint pieces; the right
    side comes from the b-table. The allowance adds the measure rounding.
    """
    if int(scale) < 1:
        raise PreconditionError("scale", f"must be a positive integer, got {scale}")
    K, C = int(K), int(scale)
    realization = realize(phi, seq, K, max_denominator)
    if K == 0:
        return CrossCheckReport(0, C, 0.0, 0.0, 0.0, tol, True)

    combined = sum_all(realization.functions, [1.0 / (C * n) for n in range(1, K + 1)])
    lhs = modular(phi, combined)

    table = b_table(phi, seq, K, C * K)
    terms = [table.b(n, C * n) / (C * n) for n in range(1, K + 1)]
    rhs = math.fsum(terms)
    allowance = tol + realization.rounding_error * math.fsum(abs(x) for x in terms)
    difference = abs(lhs - rhs)
    agrees = difference <= allowance
    log_structured(
        logger, logging.INFO if agrees else logging.ERROR, "series identity",
        phi=phi.label, K=K, scale=C, lhs=lhs, rhs=rhs,
    )
    return CrossCheckReport(K, C, lhs, rhs, difference, allowance, agrees)


__all__ = [
    "Block",
    "EligibleSequence",
    "BnmTable",
    "WeakNullVerdict",
    "WeakNullReport",
    "SeriesVerdict",
    "DHSeriesReport",
    "Realization",
    "CrossCheckReport",
    "BUILTIN_SEQUENCES",
    "builtin_sequence",
    "b_table",
    "weak_null_criterion",
    "series_from_limits",
    "dh_series_test",
    "realize",
    "realized_norms",
    "cross_check_series_identity",
]
