"""
📈 Orlicz functions
===================

Representation, validation, conjugation and growth probes for Orlicz
functions phi: [0, inf) -> [0, inf) (convex, nondecreasing, non-constant,
phi(0) = 0).

Families:
    power(p)            t^p, p >= 1
    power-log(p)        t^p * log(1 + t), p >= 1
    exp-minus-linear    e^t - t - 1
    linear              t
    piecewise-linear    knots (x_i, y_i), x_0 = 0, linear beyond the last knot
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..constants import (
    BRACKET_CAP,
    DEFAULT_TOL,
    DELTA2_FAIL_THRESHOLD,
    DELTA2_TREND_RTOL,
    DELTA2_ZERO_T0_SPAN,
    GRID_RATIO,
    KR_T_MIN,
    SLOPE_MARGIN,
    SLOPE_PROBE_T,
    VALIDATION_GRID_SPAN,
)
from ..utils.logger import log_structured
from .errors import DegenerateInputError, DomainError, PreconditionError

logger = logging.getLogger("orliczlab.orlicz")

FINITE_GRID_NOTE = (
    "finite-grid heuristic: the condition quantifies over all t > t0, "
    "a finite probe can refute it or support it, never prove it"
)


class Family(str, Enum):
    POWER = "power"
    POWER_LOG = "power-log"
    EXP_MINUS_LINEAR = "exp-minus-linear"
    LINEAR = "linear"
    PIECEWISE_LINEAR = "piecewise-linear"


_PARAMETRIC = (Family.POWER, Family.POWER_LOG)


@dataclass(frozen=True)
class OrliczFunction:
    """An Orlicz function given by a named family or piecewise-linear knots.

    Structural problems (bad exponent, malformed knots) raise at construction.
    Convexity and the other Orlicz axioms are checked by :func:`validate`, so
    a non-convex knot list can still be built and reported on.
    """

    family: Family
    p: float = 1.0
    knots: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        try:
            family = Family(self.family)
        except ValueError:
            raise PreconditionError("family", f"unknown Orlicz family {self.family!r}")
        object.__setattr__(self, "family", family)

        if family in _PARAMETRIC:
            p = float(self.p)
            if not math.isfinite(p) or p < 1.0:
                raise PreconditionError("p", f"exponent must be finite and >= 1, got {self.p!r}")
            object.__setattr__(self, "p", p)
        else:
            object.__setattr__(self, "p", 1.0)

        if family is Family.PIECEWISE_LINEAR:
            object.__setattr__(self, "knots", _checked_knots(self.knots))
        elif self.knots:
            raise PreconditionError("knots", "knots are only accepted by the piecewise-linear family")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        return cls(Family.POWER, p)

    @classmethod
    def power_log(cls, p: float) -> "OrliczFunction":
        return cls(Family.POWER_LOG, p)

    @classmethod
    def exp_minus_linear(cls) -> "OrliczFunction":
        return cls(Family.EXP_MINUS_LINEAR)

    @classmethod
    def linear(cls) -> "OrliczFunction":
        return cls(Family.LINEAR)

    @classmethod
    def piecewise_linear(cls, knots: Iterable[Sequence[float]]) -> "OrliczFunction":
        return cls(Family.PIECEWISE_LINEAR, knots=tuple(tuple(k) for k in knots))

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any]) -> "OrliczFunction":
        """Build from the ``{family, params, knots}`` config object."""
        family = spec.get("family")
        params = list(spec.get("params") or [])
        knots = spec.get("knots")
        try:
            family = Family(family)
        except ValueError:
            raise PreconditionError("family", f"unknown Orlicz family {family!r}")
        if family in _PARAMETRIC:
            if len(params) != 1:
                raise PreconditionError("params", f"{family.value} takes exactly one parameter p")
            return cls(family, params[0])
        if params:
            raise PreconditionError("params", f"{family.value} takes no parameters")
        if family is Family.PIECEWISE_LINEAR:
            return cls.piecewise_linear(knots or ())
        if knots:
            raise PreconditionError("knots", "knots are only accepted by the piecewise-linear family")
        return cls(family)

    def to_spec(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "params": [self.p] if self.family in _PARAMETRIC else [],
            "knots": [list(k) for k in self.knots] if self.knots else None,
        }

    @property
    def label(self) -> str:
        if self.family in _PARAMETRIC:
            return f"{self.family.value}({self.p:g})"
        if self.family is Family.PIECEWISE_LINEAR:
            return f"piecewise-linear[{len(self.knots)} knots]"
        return self.family.value

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def values(self, t: Any) -> np.ndarray:
        """Vectorized evaluation without domain checks.

        Overflow yields ``inf``; callers pass nonnegative arrays.
        """
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.family is Family.POWER:
                return np.power(t, self.p)
            if self.family is Family.POWER_LOG:
                return np.power(t, self.p) * np.log1p(t)
            if self.family is Family.EXP_MINUS_LINEAR:
                return np.expm1(t) - t
            if self.family is Family.LINEAR:
                return t.copy()
            return self._piecewise(t)

    def _piecewise(self, t: np.ndarray) -> np.ndarray:
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        inside = np.interp(t, xs, ys)
        return np.where(t > xs[-1], ys[-1] + slope * (t - xs[-1]), inside)

    def knot_slopes(self) -> List[float]:
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, y0), (x1, y1) in zip(self.knots, self.knots[1:])
        ]


def _checked_knots(raw: Iterable[Sequence[float]]) -> Tuple[Tuple[float, float], ...]:
    try:
        knots = tuple((float(x), float(y)) for x, y in raw)
    except (TypeError, ValueError):
        raise PreconditionError("knots", "knots must be a list of [abscissa, value] pairs")
    if len(knots) < 2:
        raise PreconditionError("knots", "at least two knots are required")
    if not all(math.isfinite(x) and math.isfinite(y) for x, y in knots):
        raise PreconditionError("knots", "knot coordinates must be finite")
    if knots[0][0] != 0.0:
        raise PreconditionError("knots", "the first knot must sit at abscissa 0")
    for (x0, _), (x1, _) in zip(knots, knots[1:]):
        if not x1 > x0:
            raise PreconditionError("knots", f"abscissae must be strictly increasing ({x0} then {x1})")
    return knots


def evaluate(phi: OrliczFunction, t: float) -> float:
    """Return phi(t) for a finite t >= 0.

    Raises:
        DomainError: if t is negative, non-finite or not a number
    """
    try:
        t = float(t)
    except (TypeError, ValueError):
        raise DomainError("t", f"expected a number, got {t!r}")
    if not math.isfinite(t) or t < 0:
        raise DomainError("t", f"expected a finite nonnegative number, got {t!r}")
    return float(phi.values(t))


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class OrliczValidationReport:
    """Outcome of :func:`validate`; a violation is report content, not an error."""

    passed: bool
    violation: Optional[str] = None
    at_t: Optional[float] = None
    detail: str = ""
    grid_size: int = 0
    t_max: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "violation": self.violation,
            "at_t": self.at_t,
            "detail": self.detail,
            "grid_size": self.grid_size,
            "t_max": self.t_max,
        }


def validate(
    phi: OrliczFunction,
    grid_size: int = 100,
    t_max: float = 10.0,
    tol: float = DEFAULT_TOL,
) -> OrliczValidationReport:
    """Check the Orlicz axioms on a geometric grid over (0, t_max].

    Checks run in order (knot slopes, phi(0) = 0, monotonicity, midpoint
    convexity, non-constancy) and the first violation is reported.
    """
    if int(grid_size) < 3:
        raise PreconditionError("grid_size", f"must be >= 3, got {grid_size}")
    if not (math.isfinite(t_max) and t_max > 0):
        raise PreconditionError("t_max", f"must be a positive finite number, got {t_max}")
    grid_size = int(grid_size)

    def violation(kind: str, at_t: float, detail: str) -> OrliczValidationReport:
        return OrliczValidationReport(False, kind, float(at_t), detail, grid_size, float(t_max))

    if phi.family is Family.PIECEWISE_LINEAR:
        slopes = phi.knot_slopes()
        for i in range(1, len(slopes)):
            if slopes[i] < slopes[i - 1] - tol * max(1.0, abs(slopes[i - 1])):
                return violation(
                    "convexity",
                    phi.knots[i][0],
                    f"slope drops {slopes[i - 1]:g} -> {slopes[i]:g} at knot {phi.knots[i][0]:g}",
                )

    at_zero = float(phi.values(0.0))
    if abs(at_zero) > tol:
        return violation("zero", 0.0, f"phi(0) = {at_zero:g}")

    ts = np.concatenate(([0.0], np.geomspace(t_max * VALIDATION_GRID_SPAN, t_max, grid_size)))
    vals = phi.values(ts)
    if np.isnan(vals).any():
        bad = int(np.flatnonzero(np.isnan(vals))[0])
        return violation("finite", ts[bad], "phi is undefined on the grid")

    with np.errstate(invalid="ignore"):
        scale = np.maximum(1.0, np.abs(vals[:-1]))
        drops = np.flatnonzero(vals[1:] < vals[:-1] - tol * scale)
    if drops.size:
        i = int(drops[0])
        return violation("monotonicity", ts[i + 1], f"phi({ts[i + 1]:g}) < phi({ts[i]:g})")

    pairs = [
        (ts[:-1], ts[1:], vals[:-1], vals[1:]),
        (np.zeros(ts.size - 1), ts[1:], np.zeros(ts.size - 1), vals[1:]),
    ]
    for left, right, f_left, f_right in pairs:
        with np.errstate(invalid="ignore"):
            mid_vals = phi.values((left + right) / 2)
            chord = (f_left + f_right) / 2
            bad = np.flatnonzero(mid_vals > chord + tol * np.maximum(1.0, np.abs(chord)))
        if bad.size:
            i = int(bad[0])
            mid = (left[i] + right[i]) / 2
            return violation(
                "convexity", mid, f"midpoint value {mid_vals[i]:g} exceeds chord {chord[i]:g}"
            )

    if not np.any(vals[1:] > tol):
        return violation("non-constant", t_max, "phi vanishes on the whole grid")

    return OrliczValidationReport(True, grid_size=grid_size, t_max=float(t_max))


# ----------------------------------------------------------------------
# Conjugation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ConjugateValue:
    """phi*(s); ``value`` is ``math.inf`` when ``infinite`` is set."""

    value: float
    infinite: bool
    maximizer: Optional[float]
    slope_estimate: float


def asymptotic_slope(phi: OrliczFunction, t_cap: float = SLOPE_PROBE_T) -> float:
    """Secant slope of phi on [t_cap, 2 t_cap]; inf when phi overflows."""
    lo, hi = phi.values(np.array([t_cap, 2.0 * t_cap]))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return math.inf
    return float((hi - lo) / t_cap)


def _slope_probes(t_cap: float) -> Iterable[float]:
    t = t_cap
    while 2.0 * t < BRACKET_CAP:
        yield t
        t *= 10.0


def conjugate(
    phi: OrliczFunction,
    s: float,
    tol: float = DEFAULT_TOL,
    t_cap: float = SLOPE_PROBE_T,
    slope_margin: float = SLOPE_MARGIN,
) -> ConjugateValue:
    """Evaluate phi*(s) = sup{s t - phi(t) : t >= 0}.

    The sup is infinite when s exceeds the asymptotic slope of phi. The slope
    is estimated at t_cap; if s beats it by the relative margin, probes at
    10 t_cap, 100 t_cap, ... confirm that it stays above before the infinite
    flag is returned. Otherwise the concave map t -> s t - phi(t) is
    bracketed by doubling and maximized with a bounded scalar search.
    """
    s = float(s)
    if not math.isfinite(s) or s < 0:
        raise DomainError("s", f"expected a finite nonnegative number, got {s!r}")
    if not tol > 0:
        raise PreconditionError("tol", f"must be positive, got {tol}")

    slope = asymptotic_slope(phi, t_cap)
    if s > slope * (1.0 + slope_margin):
        for probe in _slope_probes(t_cap):
            if s <= asymptotic_slope(phi, probe) * (1.0 + slope_margin):
                break
        else:
            return ConjugateValue(math.inf, True, None, slope)

    def gain(t: float) -> float:
        return s * t - float(phi.values(t))

    hi = 1.0
    while gain(2.0 * hi) > gain(hi):
        hi *= 2.0
        if hi > BRACKET_CAP / 4.0:
            log_structured(
                logger, logging.DEBUG, "conjugate bracket reached the hard cap",
                s=s, phi=phi.label, bracket=hi,
            )
            return ConjugateValue(math.inf, True, None, slope)

    result = minimize_scalar(
        lambda t: -gain(t), bounds=(0.0, 2.0 * hi), method="bounded", options={"xatol": tol}
    )
    candidates = [(0.0, 0.0), (gain(hi), hi), (-float(result.fun), float(result.x))]
    value, maximizer = max(candidates)
    return ConjugateValue(max(value, 0.0), False, maximizer, slope)


def closed_form_conjugate(phi: OrliczFunction, s: float) -> Optional[float]:
    """Reference phi*(s) for families with a closed form, else None."""
    if phi.family is Family.LINEAR or (phi.family is Family.POWER and phi.p == 1.0):
        return 0.0 if s <= 1.0 else math.inf
    if phi.family is Family.POWER:
        p = phi.p
        return (p - 1.0) * (s / p) ** (p / (p - 1.0))
    if phi.family is Family.EXP_MINUS_LINEAR:
        return (1.0 + s) * math.log1p(s) - s
    return None


def biconjugate(
    phi: OrliczFunction,
    ts: Sequence[float],
    s_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """phi**(t) by brute force: max over the s-grid of s t - phi*(s)."""
    s_values = []
    conj_values = []
    for s in s_grid:
        c = conjugate(phi, s, tol)
        if not c.infinite:
            s_values.append(float(s))
            conj_values.append(c.value)
    if not s_values:
        raise DegenerateInputError("s_grid", "phi* is infinite on the whole grid")
    s_arr = np.asarray(s_values)
    c_arr = np.asarray(conj_values)
    t_arr = np.asarray(ts, dtype=float)
    return np.max(np.outer(t_arr, s_arr) - c_arr[None, :], axis=1)


def young_gap(phi: OrliczFunction, s: float, t: float, tol: float = DEFAULT_TOL) -> float:
    """phi(t) + phi*(s) - s t, nonnegative up to tol by Young's inequality."""
    c = conjugate(phi, s, tol)
    if c.infinite:
        return math.inf
    return evaluate(phi, t) + c.value - float(s) * float(t)


# ----------------------------------------------------------------------
# Delta2 probe
# ----------------------------------------------------------------------
class Delta2Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Delta2Report:
    satisfied: Delta2Verdict
    c_est: float
    t_range: Tuple[float, float]
    max_ratio: float
    witness_t: Optional[float]
    fail_threshold: float
    grid_points: int
    note: str = FINITE_GRID_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "satisfied": self.satisfied.value,
            "c_est": self.c_est,
            "t_range": list(self.t_range),
            "max_ratio": self.max_ratio,
            "witness_t": self.witness_t,
            "fail_threshold": self.fail_threshold,
            "grid_points": self.grid_points,
            "note": self.note,
        }


def delta2_check(
    phi: OrliczFunction,
    t0: float = 1.0,
    t_max: float = 1e6,
    grid_size: int = 200,
    fail_threshold: float = DELTA2_FAIL_THRESHOLD,
) -> Delta2Report:
    """Probe phi(2t) <= C phi(t) for t in (t0, t_max] on a geometric grid.

    ``c_est`` is the largest ratio on the grid, ``max_ratio`` the largest one
    in the top decade [t_max/10, t_max].
    """
    if not (0 <= t0 < t_max) or not math.isfinite(t_max):
        raise PreconditionError("t0", f"need 0 <= t0 < t_max, got t0={t0}, t_max={t_max}")
    if int(grid_size) < 2:
        raise PreconditionError("grid_size", f"must be >= 2, got {grid_size}")
    if not fail_threshold > 1:
        raise PreconditionError("fail_threshold", f"must exceed 1, got {fail_threshold}")

    lo = t0 * GRID_RATIO if t0 > 0 else t_max * DELTA2_ZERO_T0_SPAN
    lo = min(lo, t_max)
    ts = np.geomspace(lo, t_max, int(grid_size))
    ts = ts[ts > t0]
    base = phi.values(ts)
    doubled = phi.values(2.0 * ts)

    usable = np.isfinite(base) & (base > 0)
    if not usable.any():
        raise DegenerateInputError("phi", "phi(t) = 0 on the whole probe grid")
    ts, base, doubled = ts[usable], base[usable], doubled[usable]
    with np.errstate(over="ignore"):
        ratios = np.where(np.isfinite(doubled), doubled / base, np.inf)

    c_est = float(np.max(ratios))
    top = ts >= t_max / 10.0
    top_ratios = ratios[top]
    lower_ratios = ratios[~top]
    max_ratio = float(np.max(top_ratios)) if top_ratios.size else c_est

    exceed = np.flatnonzero(ratios > fail_threshold)
    witness = None
    if exceed.size:
        verdict = Delta2Verdict.FAILS
        witness = float(ts[exceed[0]])
        log_structured(
            logger, logging.INFO, "delta2 refuted on the probe grid",
            phi=phi.label, witness_t=witness, ratio=float(ratios[exceed[0]]),
        )
    else:
        non_increasing = bool(
            np.all(top_ratios[1:] <= top_ratios[:-1] * (1.0 + DELTA2_TREND_RTOL))
        )
        no_new_high = bool(
            lower_ratios.size and max_ratio <= float(np.max(lower_ratios)) * (1.0 + DELTA2_TREND_RTOL)
        )
        verdict = Delta2Verdict.HOLDS if (non_increasing or no_new_high) else Delta2Verdict.INCONCLUSIVE

    return Delta2Report(
        satisfied=verdict,
        c_est=c_est,
        t_range=(float(ts[0]), float(ts[-1])),
        max_ratio=max_ratio,
        witness_t=witness,
        fail_threshold=float(fail_threshold),
        grid_points=int(ts.size),
    )


# ----------------------------------------------------------------------
# Dual Delta2 probe (failure of Delta2 for phi*)
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class KRProbeResult:
    """Search result for t with phi(t) > phi(L t) / (2 L).

    ``ties`` counts grid points where both sides are equal; they are not
    witnesses (the inequality is strict).
    """

    witness_t: Optional[float]
    L: float
    t_floor: float
    t_cap: float
    grid_points: int
    ties: int

    @property
    def status(self) -> str:
        return "witness" if self.witness_t is not None else "inconclusive-at-cap"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "witness_t": self.witness_t,
            "L": self.L,
            "t_floor": self.t_floor,
            "t_cap": self.t_cap,
            "grid_points": self.grid_points,
            "ties": self.ties,
            "status": self.status,
        }


def kr_dual_delta2_probe(
    phi: OrliczFunction,
    L: float,
    t_floor: float = 0.0,
    t_cap: float = SLOPE_PROBE_T,
    ratio: float = GRID_RATIO,
) -> KRProbeResult:
    """Look for the first grid point t in (t_floor, t_cap] with phi(t) > phi(Lt)/(2L)."""
    if not L > 1:
        raise PreconditionError("L", f"must exceed 1, got {L}")
    if not (0 <= t_floor < t_cap) or not math.isfinite(t_cap):
        raise PreconditionError("t_floor", f"need 0 <= t_floor < t_cap, got {t_floor}, {t_cap}")
    if not ratio > 1:
        raise PreconditionError("ratio", f"must exceed 1, got {ratio}")

    start = t_floor * ratio if t_floor > 0 else KR_T_MIN
    if start > t_cap:
        return KRProbeResult(None, float(L), float(t_floor), float(t_cap), 0, 0)
    count = int(math.floor(math.log(t_cap / start) / math.log(ratio))) + 1
    ts = start * np.power(ratio, np.arange(count))
    ts = ts[ts <= t_cap]

    lhs = phi.values(ts)
    rhs = phi.values(L * ts) / (2.0 * L)
    hits = np.flatnonzero(lhs > rhs)
    ties = int(np.count_nonzero(lhs == rhs))
    witness = float(ts[hits[0]]) if hits.size else None
    if ties:
        log_structured(logger, logging.DEBUG, "kr probe met boundary ties", phi=phi.label, L=L, ties=ties)
    return KRProbeResult(witness, float(L), float(t_floor), float(t_cap), int(ts.size), ties)


DEFAULT_KR_LADDER: Tuple[Tuple[float, float], ...] = (
    (1.5, 0.0),
    (2.0, 1.0),
    (4.0, 10.0),
    (8.0, 100.0),
    (16.0, 1000.0),
)


@dataclass(frozen=True)
class KREscalationReport:
    results: Tuple[KRProbeResult, ...]

    @property
    def all_witnessed(self) -> bool:
        return all(r.witness_t is not None for r in self.results)

    @property
    def first_miss(self) -> Optional[int]:
        for index, r in enumerate(self.results):
            if r.witness_t is None:
                return index
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "results": [r.to_dict() for r in self.results],
            "all_witnessed": self.all_witnessed,
            "first_miss": self.first_miss,
            "note": "repeated witnesses are evidence that phi* fails delta2; a miss is inconclusive",
        }


def kr_escalation(
    phi: OrliczFunction,
    pairs: Sequence[Tuple[float, float]] = DEFAULT_KR_LADDER,
    t_cap: float = SLOPE_PROBE_T,
) -> KREscalationReport:
    """Run the dual probe over escalating (L, t_floor) pairs."""
    results = []
    for L, t_floor in pairs:
        cap = max(t_cap, t_floor * 1e3)
        results.append(kr_dual_delta2_probe(phi, L, t_floor, cap))
    return KREscalationReport(tuple(results))


__all__ = [
    "Family",
    "OrliczFunction",
    "OrliczValidationReport",
    "ConjugateValue",
    "Delta2Verdict",
    "Delta2Report",
    "KRProbeResult",
    "KREscalationReport",
    "DEFAULT_KR_LADDER",
    "evaluate",
    "validate",
    "asymptotic_slope",
    "conjugate",
    "closed_form_conjugate",
    "biconjugate",
    "young_gap",
    "delta2_check",
    "kr_dual_delta2_probe",
    "kr_escalation",
]
