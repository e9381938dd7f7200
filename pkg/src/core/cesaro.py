"""
🔁 Cesaro averages and order-boundedness diagnostics
====================================================

Running averages A_n = (f_1 + ... + f_n) / n of a sequence of step functions,
finite-truncation diagnostics for the running suprema of |A_n|, and three
deterministic checks:

* the disjoint p-convexity bound for power functions,
* the pointwise supremum inequality over congruence classes mod N,
* the modular bound for disjoint sequences built on that inequality.

All checks work on the common refinement of the prefix, so each function
becomes one column of a (pieces x K) matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..constants import BOUNDED_GROWTH_EPS, DEFAULT_TOL, DIVERGENCE_SLOPE, SUP_CES_VALUE_TOL
from ..utils.logger import log_structured
from .errors import InvariantViolationError, PreconditionError
from .orlicz import OrliczFunction
from .simplefn import (
    ONE,
    ZERO,
    SimpleFunction,
    combine,
    indicator,
    lattice_abs,
    luxemburg_norm,
    modular_from_arrays,
    norm_from_arrays,
    refine,
    scale,
    sum_all,
    zero,
)

logger = logging.getLogger("orliczlab.cesaro")

TREND_NOTE = (
    "finite truncation: trends describe the computed prefix and cannot prove "
    "order boundedness of the infinite sequence"
)


# ----------------------------------------------------------------------
# Sequences
# ----------------------------------------------------------------------
def dyadic_block(k: int) -> Tuple[Fraction, Fraction]:
    """I_k = [1 - 2^-(k-1), 1 - 2^-k)."""
    return ONE - Fraction(1, 2 ** (k - 1)), ONE - Fraction(1, 2**k)


@dataclass(frozen=True)
class FunctionSequence:
    """A deterministic rule producing the k-th function (k >= 1) on demand."""

    generator: Callable[[int], SimpleFunction]
    declared_disjoint: bool = False
    label: str = "explicit"
    length: Optional[int] = None

    def term(self, k: int) -> SimpleFunction:
        if k < 1:
            raise PreconditionError("k", f"sequence indices start at 1, got {k}")
        if self.length is not None and k > self.length:
            raise PreconditionError("N", f"sequence {self.label!r} has only {self.length} terms, asked for {k}")
        return self.generator(k)

    def prefix(self, count: int) -> List[SimpleFunction]:
        return [self.term(k) for k in range(1, count + 1)]

    def first_overlap(self, count: int) -> Optional[Tuple[int, int]]:
        """First pair (i, j), i < j <= count, with overlapping supports, else None."""
        fs = self.prefix(count)
        _, rows = refine(fs)
        for row in rows:
            owners = [k + 1 for k, v in enumerate(row) if v != 0.0]
            if len(owners) > 1:
                return owners[0], owners[1]
        return None

    def require_disjoint(self, count: int) -> None:
        if not self.declared_disjoint:
            raise PreconditionError("seq", f"sequence {self.label!r} is not declared disjoint")
        overlap = self.first_overlap(count)
        if overlap is not None:
            raise PreconditionError("seq", f"terms {overlap[0]} and {overlap[1]} have overlapping supports")

    # ------------------------------------------------------------------
    # Factories
    # ------------------------------------------------------------------
    @classmethod
    def explicit(cls, fs: Sequence[SimpleFunction], declared_disjoint: bool = False, label: str = "explicit") -> "FunctionSequence":
        items = tuple(fs)
        return cls(lambda k: items[k - 1], declared_disjoint, label, len(items))

    @classmethod
    def zeros(cls) -> "FunctionSequence":
        return cls(lambda k: zero(), True, "zero")

    @classmethod
    def constant_terms(cls, f: SimpleFunction) -> "FunctionSequence":
        return cls(lambda k: f, False, "constant")

    @classmethod
    def geometric(cls, f: SimpleFunction, ratio: float) -> "FunctionSequence":
        """f_k = ratio^k * f."""
        return cls(lambda k: scale(ratio**k, f), False, f"geometric({ratio:g})")

    @classmethod
    def dyadic_blocks(cls, phi: Optional[OrliczFunction] = None, height: float = 1.0) -> "FunctionSequence":
        """height * chi_{I_k}, divided by its phi-norm when phi is given."""

        @lru_cache(maxsize=None)
        def generate(k: int) -> SimpleFunction:
            a, b = dyadic_block(k)
            block = indicator(a, b)
            if phi is not None:
                block = scale(1.0 / luxemburg_norm(phi, block), block)
            return scale(height, block)

        suffix = f", normalized in {phi.label}" if phi is not None else ""
        return cls(generate, True, f"dyadic-blocks(height={height:g}{suffix})")

    @classmethod
    def seeded_disjoint_blocks(cls, seed: int, max_pieces: int = 3) -> "FunctionSequence":
        """Random step values inside the k-th dyadic block; stateless in (seed, k)."""

        def generate(k: int) -> SimpleFunction:
            rng = np.random.default_rng([seed, k])
            a, b = dyadic_block(k)
            count = int(rng.integers(1, max_pieces + 1))
            cuts = sorted({a + (b - a) * Fraction(int(c), 8) for c in rng.integers(1, 8, size=count - 1)})
            values = rng.normal(size=len(cuts) + 1)
            pieces: List[Tuple[Fraction, float]] = [(a, 0.0)] if a > ZERO else []
            pieces.extend(zip(cuts + [b], (float(v) for v in values)))
            if b < ONE:
                pieces.append((ONE, 0.0))
            return SimpleFunction.from_pieces(pieces)

        return cls(generate, True, f"seeded-disjoint-blocks(seed={seed})")

    @classmethod
    def seeded_random_steps(cls, seed: int, denominators: Sequence[int] = (2, 3, 4, 5, 6, 8)) -> "FunctionSequence":
        """Random signed step functions on small-denominator grids; stateless in (seed, k)."""

        def generate(k: int) -> SimpleFunction:
            rng = np.random.default_rng([seed, k])
            den = int(rng.choice(denominators))
            values = rng.normal(size=den)
            return SimpleFunction.from_pieces(
                (Fraction(i + 1, den), float(v)) for i, v in enumerate(values)
            )

        return cls(generate, False, f"seeded-random-steps(seed={seed})")


# ----------------------------------------------------------------------
# Averages
# ----------------------------------------------------------------------
def _refined_matrix(fs: Sequence[SimpleFunction]) -> Tuple[List[Fraction], np.ndarray, np.ndarray]:
    """Refinement ends, piece measures (float) and the values matrix (pieces x K)."""
    ends, rows = refine(fs)
    starts = [ZERO] + ends[:-1]
    weights = np.array([float(e - s) for s, e in zip(starts, ends)])
    return ends, weights, np.array(rows, dtype=float).reshape(len(ends), len(fs))


def _from_columns(ends: Sequence[Fraction], column: np.ndarray) -> SimpleFunction:
    return SimpleFunction.from_pieces(zip(ends, column.tolist()))


def cesaro_average(seq: FunctionSequence, n: int) -> SimpleFunction:
    """(1/n) * sum_{k<=n} f_k, summed exactly per piece."""
    if n < 1:
        raise PreconditionError("n", f"must be >= 1, got {n}")
    return combine(seq.prefix(n), lambda row: math.fsum(row) / n)


def running_averages(values: np.ndarray) -> np.ndarray:
    """Column n-1 holds A_n on every refined piece."""
    counts = np.arange(1, values.shape[1] + 1, dtype=float)
    return np.cumsum(values, axis=1) / counts


def running_suprema(values: np.ndarray) -> np.ndarray:
    """Column n-1 holds the running supremum of |A_1|, ..., |A_n|."""
    return np.maximum.accumulate(np.abs(running_averages(values)), axis=1)


def class_suprema(values: np.ndarray, N: int) -> np.ndarray:
    """Row l: sup over j of |average of the first j indices i = l (mod N)|.

    Indices run over 1..K; class l = 0 collects N, 2N, ...
    """
    K = values.shape[1]
    out = np.zeros((N, values.shape[0]))
    for ell in range(N):
        members = [i for i in range(1, K + 1) if i % N == ell]
        if members:
            block = values[:, [i - 1 for i in members]]
            out[ell] = np.max(np.abs(running_averages(block)), axis=1)
    return out


# ----------------------------------------------------------------------
# Order-boundedness diagnostics
# ----------------------------------------------------------------------
class Trend(str, Enum):
    BOUNDED = "bounded-trend"
    UNBOUNDED = "unbounded-trend"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CesaroDiagnostics:
    N: int
    sup_norms: Tuple[float, ...]
    cauchy_gaps: Tuple[float, ...]
    verdict: Trend
    growth_ratio: float
    divergence_slope: float
    gaps_shrink: bool
    note: str = TREND_NOTE

    def to_records(self) -> List[Dict[str, Any]]:
        return [
            {
                "n": n,
                "sup_norm": self.sup_norms[n - 1],
                "gap": self.cauchy_gaps[n - 1] if n < self.N else 0.0,
            }
            for n in range(1, self.N + 1)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "verdict": self.verdict.value,
            "growth_ratio": self.growth_ratio,
            "divergence_slope": self.divergence_slope,
            "gaps_shrink": self.gaps_shrink,
            "records": self.to_records(),
            "note": self.note,
        }


def _check_monotone(values: Sequence[float], increasing: bool, tol: float, what: str) -> None:
    for i in range(1, len(values)):
        prev, cur = values[i - 1], values[i]
        slack = 2.0 * tol + 1e-12 * max(abs(prev), abs(cur))
        broken = cur < prev - slack if increasing else cur > prev + slack
        if broken:
            raise InvariantViolationError(
                "seq", f"{what} not {'nondecreasing' if increasing else 'nonincreasing'} at index {i + 1}"
            )


def _trend(
    sup_norms: Sequence[float],
    gaps: Sequence[float],
    tol: float,
    growth_eps: float,
    divergence_slope: float,
) -> Tuple[Trend, float, float, bool]:
    N = len(sup_norms)
    ns = np.arange(1, N + 1)
    tail = ns >= math.ceil(N / 2)
    x = np.sqrt(np.log(ns[tail]))
    y = np.asarray(sup_norms)[tail]
    slope = float(np.polyfit(x, y, 1)[0]) if x.size >= 2 else 0.0

    last = sup_norms[-1]
    base = sup_norms[max(1, N // 10) - 1]
    if last <= tol:
        growth = 1.0
    elif base > 0:
        growth = last / base
    else:
        growth = math.inf

    gaps_shrink = (not gaps) or gaps[0] <= 10.0 * tol or gaps[len(gaps) // 2] <= 0.5 * gaps[0]

    if slope > divergence_slope:
        return Trend.UNBOUNDED, growth, slope, gaps_shrink
    if growth < 1.0 + growth_eps and gaps_shrink:
        return Trend.BOUNDED, growth, slope, gaps_shrink
    return Trend.INCONCLUSIVE, growth, slope, gaps_shrink


def diagnose_order_boundedness(
    phi: OrliczFunction,
    seq: FunctionSequence,
    N: int,
    tol: float = DEFAULT_TOL,
    growth_eps: float = BOUNDED_GROWTH_EPS,
    divergence_slope: float = DIVERGENCE_SLOPE,
) -> CesaroDiagnostics:
    """Norms of the running suprema g_n = sup_{i<=n} |A_i| and Cauchy gaps ||g_N - g_r||.

    The gap for r is the max over r < s <= N of ||g_s - g_r||, which equals
    ||g_N - g_r|| because g_s increases with s.
    """
    if N < 2:
        raise PreconditionError("N", f"must be >= 2, got {N}")
    _, weights, values = _refined_matrix(seq.prefix(N))
    suprema = running_suprema(values)

    sup_norms = tuple(norm_from_arrays(phi, suprema[:, n], weights, tol) for n in range(N))
    last = suprema[:, N - 1]
    gaps = tuple(norm_from_arrays(phi, last - suprema[:, r], weights, tol) for r in range(N - 1))

    _check_monotone(sup_norms, True, tol, "sup_norms")
    _check_monotone(gaps, False, tol, "cauchy_gaps")

    verdict, growth, slope, shrink = _trend(sup_norms, gaps, tol, growth_eps, divergence_slope)
    log_structured(
        logger, logging.INFO, "order-boundedness diagnostics",
        phi=phi.label, seq=seq.label, N=N, verdict=verdict.value, slope=round(slope, 6),
    )
    return CesaroDiagnostics(N, sup_norms, gaps, verdict, growth, slope, shrink)


# ----------------------------------------------------------------------
# Disjoint p-convexity bound
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PConvexReport:
    p: float
    n: int
    m: int
    lhs: float
    rhs: float
    slack: float
    identity_error: float
    holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "n": self.n,
            "m": self.m,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "identity_error": self.identity_error,
            "holds": self.holds,
        }


def disjoint_p_convex_bound_check(
    p: float,
    seq: FunctionSequence,
    n: int,
    m: int,
    tol: float = DEFAULT_TOL,
) -> PConvexReport:
    """Check ||g_m - g_n||_p <= (sum_{k=n+1}^m k^-p)^(1/p) * max_k ||f_k||_p.

    Here g_n = sum_{k<=n} |f_k| / k. Also checks, on every refined piece,
    that g_n equals both the running supremum of |A_k| and the l^p form
    (sum_{k<=n} |f_k|^p / k^p)^(1/p), which holds for disjoint terms.
    """
    if not p > 1:
        raise PreconditionError("p", f"must exceed 1, got {p}")
    if not 1 <= n < m:
        raise PreconditionError("n", f"need 1 <= n < m, got n={n}, m={m}")
    seq.require_disjoint(m)

    fs = seq.prefix(m)
    weights_1k = [1.0 / k for k in range(1, m + 1)]
    if lattice_abs(sum_all(fs, weights_1k)) != sum_all([lattice_abs(f) for f in fs], weights_1k):
        raise InvariantViolationError("seq", f"|sum f_k / k| differs from sum |f_k| / k over the first {m} terms")

    phi = OrliczFunction.power(p)
    _, weights, values = _refined_matrix(fs)
    ks = np.arange(1, m + 1, dtype=float)
    g = np.cumsum(np.abs(values) / ks, axis=1)

    lhs = norm_from_arrays(phi, g[:, m - 1] - g[:, n - 1], weights, tol)
    sup_norm = max(luxemburg_norm(phi, f, tol) for f in fs)
    rhs = math.fsum(k ** (-p) for k in range(n + 1, m + 1)) ** (1.0 / p) * sup_norm

    g_n = g[:, n - 1]
    running = np.max(np.abs(running_averages(values[:, :n])), axis=1)
    lp_form = np.sum((np.abs(values[:, :n]) / ks[:n]) ** p, axis=1) ** (1.0 / p)
    scale_ = np.maximum(1.0, np.abs(g_n))
    identity_error = float(max(np.max(np.abs(running - g_n) / scale_), np.max(np.abs(lp_form - g_n) / scale_)))

    holds = lhs <= rhs + tol * max(1.0, rhs) and identity_error <= 1e-12
    return PConvexReport(float(p), n, m, lhs, rhs, rhs - lhs, identity_error, holds)


# ----------------------------------------------------------------------
# Supremum inequality over congruence classes
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SupCesReport:
    N: int
    K: int
    holds: bool
    max_violation: float
    first_violation: Optional[Tuple[Fraction, Fraction]]
    lhs: SimpleFunction = field(repr=False)
    rhs: SimpleFunction = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        interval = None
        if self.first_violation is not None:
            interval = [str(self.first_violation[0]), str(self.first_violation[1])]
        return {
            "N": self.N,
            "K": self.K,
            "holds": self.holds,
            "max_violation": self.max_violation,
            "first_violation": interval,
            "lhs": self.lhs.to_triples(),
            "rhs": self.rhs.to_triples(),
        }


def sup_ces_inequality_check(fs: Sequence[SimpleFunction], N: int, tol: float = SUP_CES_VALUE_TOL) -> SupCesReport:
    """Pointwise (N/2) sup_{N<=n<=K} |A_n| <= sum_l (class supremum for l mod N)."""
    K = len(fs)
    if not 1 <= N <= K:
        raise PreconditionError("N", f"need 1 <= N <= K, got N={N}, K={K}")
    ends, _, values = _refined_matrix(fs)
    averages = np.abs(running_averages(values))
    lhs = (N / 2.0) * np.max(averages[:, N - 1:], axis=1)
    rhs = np.sum(class_suprema(values, N), axis=0)

    excess = lhs - rhs - tol * np.maximum(1.0, np.abs(rhs))
    bad = np.flatnonzero(excess > 0)
    first = None
    if bad.size:
        i = int(bad[0])
        first = (ends[i - 1] if i else ZERO, ends[i])
        log_structured(logger, logging.ERROR, "supremum inequality violated", N=N, K=K, at=str(first))
    return SupCesReport(
        N, K, not bad.size, float(max(0.0, np.max(lhs - rhs))), first,
        _from_columns(ends, lhs), _from_columns(ends, rhs),
    )


# ----------------------------------------------------------------------
# Modular bound for disjoint sequences
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ClosedCesaroReport:
    N: int
    K: int
    premise_met: bool
    class_modulars: Tuple[float, ...]
    lhs_modular: Optional[float]
    class_sum_modular: Optional[float]
    additivity_error: Optional[float]
    holds: Optional[bool]

    @property
    def slack(self) -> Optional[float]:
        return None if self.lhs_modular is None else self.N - self.lhs_modular

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "K": self.K,
            "premise_met": self.premise_met,
            "class_modulars": list(self.class_modulars),
            "lhs_modular": self.lhs_modular,
            "class_sum_modular": self.class_sum_modular,
            "additivity_error": self.additivity_error,
            "bound": self.N,
            "slack": self.slack,
            "holds": self.holds,
        }


def closed_cesaro_modular_check(
    phi: OrliczFunction,
    seq: FunctionSequence,
    K: int,
    N: int,
    tol: float = DEFAULT_TOL,
) -> ClosedCesaroReport:
    """Check int phi((N/2) sup_{n>=N} |A_n|) <= sum_l int phi(h_l) <= N.

    The premise int phi(h_l) <= 1 for every class supremum h_l is verified
    first; if it fails the conclusion is not asserted.
    """
    if not 1 <= N <= K:
        raise PreconditionError("N", f"need 1 <= N <= K, got N={N}, K={K}")
    seq.require_disjoint(K)
    _, weights, values = _refined_matrix(seq.prefix(K))
    classes = class_suprema(values, N)
    class_modulars = tuple(modular_from_arrays(phi, h, weights) for h in classes)

    if any(c > 1.0 + tol for c in class_modulars):
        log_structured(
            logger, logging.WARNING, "class modular premise not met",
            N=N, K=K, worst=max(class_modulars),
        )
        return ClosedCesaroReport(N, K, False, class_modulars, None, None, None, None)

    averages = np.abs(running_averages(values))
    lhs_values = (N / 2.0) * np.max(averages[:, N - 1:], axis=1)
    lhs = modular_from_arrays(phi, lhs_values, weights)
    total = modular_from_arrays(phi, np.sum(classes, axis=0), weights)
    additivity_error = abs(total - math.fsum(class_modulars))

    holds = (
        lhs <= total + tol * max(1.0, total)
        and total <= N + tol
        and additivity_error <= tol * max(1.0, total)
    )
    return ClosedCesaroReport(N, K, True, class_modulars, lhs, total, additivity_error, holds)


__all__ = [
    "FunctionSequence",
    "CesaroDiagnostics",
    "Trend",
    "PConvexReport",
    "SupCesReport",
    "ClosedCesaroReport",
    "dyadic_block",
    "cesaro_average",
    "running_averages",
    "running_suprema",
    "class_suprema",
    "diagnose_order_boundedness",
    "disjoint_p_convex_bound_check",
    "sup_ces_inequality_check",
    "closed_cesaro_modular_check",
]
