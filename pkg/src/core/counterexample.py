"""
🧪 Norm-divergence counterexample
=================================

Builds a step function f = sum_i a_i * chi[beta_{i-1}, beta_i) whose i.i.d.
copies have Cesaro maxima h_n = max_{m<=n} (f_1 + ... + f_m) / m with
certified Luxemburg-norm lower bounds ||h_n|| >= C_n / (4 d), where
C_n = sqrt(H_n) grows without bound.

The construction needs, for every n,

    (LPhi1)  phi(a_n / (n C_n)) >= phi(a_n) / (2 n C_n)
    (c)      d_{n+1} - d_n <= (d_n / 2^n) (1 - 2^(-1/n))

with d_0 = 1/4 and d_n - d_{n-1} = (S_n - S_{n+1}) / phi(a_n). The limit d
is replaced by the certified upper end of [d_{n_max}, 2^(1/n_max) d_{n_max}];
a larger d only weakens every bound.

d_n are exact dyadic rationals: each float increment is added as a Fraction,
so breakpoints stay strictly increasing at any depth.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..constants import (
    D0_DENOMINATOR,
    D0_NUMERATOR,
    LPHI2_SLACK,
    MC_CHUNK_SIZE,
    MC_MAX_DIMENSION,
    MC_MIN_SAMPLES,
    MC_MIXTURE,
    MIN_TAIL_SHARE,
    PREMISE_EPS,
    SEARCH_MAX_STEPS,
    SEARCH_RATIO,
    SEARCH_START,
)
from ..utils.logger import log_structured
from .cesaro import FunctionSequence
from .errors import PreconditionError, PremiseNotMetError, SearchExhaustedError, TailDominatedError
from .orlicz import Family, OrliczFunction, validate
from .simplefn import ONE, SimpleFunction, indicator, luxemburg_norm, modular, scale

logger = logging.getLogger("orliczlab.counterexample")

TAIL_MODES = ("truncated", "conditional")


def harmonic(n: int) -> float:
    return math.fsum(1.0 / m for m in range(1, n + 1))


def _phi_at(phi: OrliczFunction, t: float) -> float:
    return float(phi.values(t))


def _condition_c_rhs(d_prev: Fraction, n_prev: int) -> float:
    """(d_{n-1} / 2^(n-1)) (1 - 2^(-1/(n-1))) in floating point."""
    return float(d_prev) / 2.0 ** (n_prev) * (1.0 - 2.0 ** (-1.0 / n_prev))


def _admissible(phi: OrliczFunction, a_n: float, k: float, s_step: float, rhs: float) -> Optional[Tuple[float, float]]:
    """(a_n, delta_n) if (LPhi1) and condition (c) hold in scalar evaluation."""
    phi_a = _phi_at(phi, a_n)
    if not math.isfinite(phi_a) or not _phi_at(phi, a_n / k) >= phi_a / (2.0 * k):
        return None
    delta = s_step / phi_a
    if not 0 < delta <= rhs:
        return None
    return a_n, delta


def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ----------------------------------------------------------------------
# Certificate
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CounterexampleCertificate:
    """All sequences of the construction up to depth n_max.

    ``C`` and ``S`` hold indices 1..n_max+1, ``a`` holds 1..n_max and
    ``d`` holds 0..n_max.
    """

    phi: OrliczFunction
    n_max: int
    C: Tuple[float, ...]
    S: Tuple[float, ...]
    a: Tuple[float, ...]
    d: Tuple[Fraction, ...]
    d_upper: Fraction
    search: Dict[str, float] = field(default_factory=dict)

    def C_n(self, n: int) -> float:
        return self.C[n - 1]

    def S_n(self, n: int) -> float:
        return self.S[n - 1]

    def a_n(self, n: int) -> float:
        return self.a[n - 1]

    @property
    def d_bracket(self) -> Tuple[Fraction, Fraction]:
        return self.d[-1], self.d_upper

    @property
    def beta(self) -> Tuple[Fraction, ...]:
        """beta_i = d_i / d_upper for i = 0..n_max."""
        return tuple(d / self.d_upper for d in self.d)

    @property
    def f(self) -> SimpleFunction:
        beta = self.beta
        pieces: List[Tuple[Fraction, float]] = [(beta[0], 0.0)]
        pieces.extend((beta[i], self.a[i - 1]) for i in range(1, self.n_max + 1))
        if beta[-1] < ONE:
            pieces.append((ONE, 0.0))
        return SimpleFunction.from_pieces(pieces)

    @property
    def remainder_measure(self) -> Fraction:
        """Measure of [beta_{n_max}, 1), where the truncated f is zero."""
        return ONE - self.beta[-1]

    def to_records(self) -> List[Dict[str, Any]]:
        beta = self.beta
        return [
            {
                "n": n,
                "C": self.C_n(n),
                "S": self.S_n(n),
                "a": self.a_n(n),
                "phi_a": _phi_at(self.phi, self.a_n(n)),
                "d": float(self.d[n]),
                "beta": float(beta[n]),
            }
            for n in range(1, self.n_max + 1)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phi": self.phi.to_spec(),
            "n_max": self.n_max,
            "search": dict(self.search),
            "C": list(self.C),
            "S": list(self.S),
            "a": list(self.a),
            "d": [_fraction_str(x) for x in self.d],
            "d_upper": _fraction_str(self.d_upper),
            "d_bracket": [float(self.d[-1]), float(self.d_upper)],
            "beta": [float(b) for b in self.beta],
            "remainder_measure": float(self.remainder_measure),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CounterexampleCertificate":
        """Rebuild from :meth:`to_dict` output; derived fields are ignored."""
        try:
            phi = OrliczFunction.from_spec(data["phi"])
            return cls(
                phi=phi,
                n_max=int(data["n_max"]),
                C=tuple(float(x) for x in data["C"]),
                S=tuple(float(x) for x in data["S"]),
                a=tuple(float(x) for x in data["a"]),
                d=tuple(Fraction(x) for x in data["d"]),
                d_upper=Fraction(data["d_upper"]),
                search=dict(data.get("search") or {}),
            )
        except KeyError as e:
            raise PreconditionError("certificate", f"missing field {e.args[0]!r}")
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise PreconditionError("certificate", f"malformed certificate: {e}")


# ----------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------
def _power_witness(phi: OrliczFunction, n: int, k: float) -> Optional[str]:
    """Algebraic reason why (LPhi1) has no solution for power(p) at this n."""
    if phi.family is not Family.POWER:
        return None
    if k ** (phi.p - 1.0) > 2.0:
        return (
            f"proved impossible: for power({phi.p:g}) (LPhi1) reads (n C_n)^(p-1) <= 2, "
            f"but (n C_n)^(p-1) = {k ** (phi.p - 1.0):.6g} at n={n}"
        )
    return None


def build_certificate(
    phi: OrliczFunction,
    n_max: int,
    ratio: float = SEARCH_RATIO,
    max_steps: int = SEARCH_MAX_STEPS,
    start: float = SEARCH_START,
) -> CounterexampleCertificate:
    """Search a_1 < a_2 < ... < a_{n_max} on geometric grids and assemble the certificate.

    a_n is the smallest grid value in (a_{n-1}, a_{n-1} * ratio^max_steps]
    meeting (LPhi1) at n and condition (c) at n-1.

    Raises:
        PreconditionError: n_max < 2, bad search parameters or phi failing validation
        SearchExhaustedError: no admissible a_n below the cap
    """
    if int(n_max) < 2:
        raise PreconditionError("n_max", f"must be >= 2, got {n_max}")
    if not ratio > 1.0:
        raise PreconditionError("ratio", f"must exceed 1, got {ratio}")
    if int(max_steps) < 1:
        raise PreconditionError("max_steps", f"must be >= 1, got {max_steps}")
    if not start > 0:
        raise PreconditionError("start", f"must be positive, got {start}")
    n_max = int(n_max)
    check = validate(phi)
    if not check.passed:
        raise PreconditionError("phi", f"not an Orlicz function: {check.violation} ({check.detail})")

    C = tuple(math.sqrt(harmonic(n)) for n in range(1, n_max + 2))
    S = tuple(1.0 / c for c in C)
    steps = np.arange(1, int(max_steps) + 1, dtype=float)

    a: List[float] = []
    d: List[Fraction] = [Fraction(D0_NUMERATOR, D0_DENOMINATOR)]
    a_prev = float(start)
    for n in range(1, n_max + 1):
        k = n * C[n - 1]
        rhs = _condition_c_rhs(d[-1], n - 1) if n >= 2 else math.inf
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            candidates = a_prev * np.power(ratio, steps)
            phi_a = phi.values(candidates)
            delta = (S[n - 1] - S[n]) / phi_a
            ok = (
                np.isfinite(candidates)
                & np.isfinite(phi_a)
                & (phi.values(candidates / k) >= phi_a / (2.0 * k))
                & (delta > 0)
                & (delta <= rhs)
            )

        # the vector pass only shortlists; the certificate stores scalar evaluations
        chosen = None
        for i in np.flatnonzero(ok):
            chosen = _admissible(phi, float(candidates[i]), k, S[n - 1] - S[n], rhs)
            if chosen is not None:
                break
        if chosen is None:
            cap = a_prev * ratio ** int(max_steps)
            witness = _power_witness(phi, n, k) or (
                f"refuted at this cap: no grid value up to {cap:.6g} satisfies (LPhi1) and (c)"
            )
            log_structured(
                logger, logging.WARNING, "counterexample search exhausted",
                phi=phi.label, n=n, cap=cap, witness=witness,
            )
            raise SearchExhaustedError(
                "n",
                f"no admissible a_n at n={n}; phi* plausibly satisfies Delta2, "
                f"so the construction's premise fails ({witness})",
                n=n, cap=cap, witness=witness,
            )
        a_n, delta_n = chosen
        a.append(a_n)
        d.append(d[-1] + Fraction(delta_n))
        log_structured(logger, logging.DEBUG, "a_n found", n=n, a_n=a_n, delta=delta_n)
        a_prev = a_n

    upper_factor = Fraction(math.nextafter(2.0 ** (1.0 / n_max), math.inf))
    d_upper = d[-1] * upper_factor
    log_structured(
        logger, logging.INFO, "certificate built",
        phi=phi.label, n_max=n_max, a_last=a[-1], d_upper=float(d_upper),
    )
    return CounterexampleCertificate(
        phi=phi,
        n_max=n_max,
        C=C,
        S=S,
        a=tuple(a),
        d=tuple(d),
        d_upper=d_upper,
        search={"ratio": float(ratio), "max_steps": int(max_steps), "start": float(start)},
    )


# ----------------------------------------------------------------------
# Independent verification
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CertificateVerification:
    passed: bool
    checks: Dict[str, bool]
    failures: Tuple[str, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checks": dict(self.checks), "failures": list(self.failures)}


def verify_certificate(cert: CounterexampleCertificate) -> CertificateVerification:
    """Re-check every invariant from the stored sequences alone.

    Nothing from the builder is reused: C, S and the d increments are
    recomputed and compared bit for bit.
    """
    phi, n_max = cert.phi, cert.n_max
    failures: List[str] = []
    checks: Dict[str, bool] = {}

    def record(name: str, problems: List[str]) -> None:
        checks[name] = not problems
        failures.extend(f"{name}: {p}" for p in problems)

    shape: List[str] = []
    if n_max < 2:
        shape.append(f"n_max={n_max} < 2")
    if (len(cert.C), len(cert.S), len(cert.a), len(cert.d)) != (n_max + 1, n_max + 1, n_max, n_max + 1):
        shape.append("sequence lengths do not match n_max")
    record("shape", shape)
    if shape:
        return CertificateVerification(False, checks, tuple(failures))

    # C_n = sqrt(sum 1/m), S_n = 1/C_n, C increasing, S decreasing
    forms: List[str] = []
    for n in range(1, n_max + 2):
        c = math.sqrt(math.fsum(1.0 / m for m in range(1, n + 1)))
        if cert.C[n - 1] != c or cert.S[n - 1] != 1.0 / c:
            forms.append(f"closed form mismatch at n={n}")
        if n >= 2 and not (cert.C[n - 1] > cert.C[n - 2] and cert.S[n - 1] < cert.S[n - 2]):
            forms.append(f"monotonicity broken at n={n}")
    record("closed_forms", forms)

    lphi1: List[str] = []
    for n in range(1, n_max + 1):
        a_n = cert.a[n - 1]
        k = n * cert.C[n - 1]
        if n >= 2 and not a_n > cert.a[n - 2]:
            lphi1.append(f"a not strictly increasing at n={n}")
        if not float(phi.values(a_n / k)) >= float(phi.values(a_n)) / (2.0 * k):
            lphi1.append(f"(LPhi1) fails at n={n}")
    record("lphi1", lphi1)

    recursion: List[str] = []
    if cert.d[0] != Fraction(D0_NUMERATOR, D0_DENOMINATOR):
        recursion.append(f"d_0 = {cert.d[0]} != 1/4")
    for n in range(1, n_max + 1):
        increment = cert.d[n] - cert.d[n - 1]
        expected = (cert.S[n - 1] - cert.S[n]) / float(phi.values(cert.a[n - 1]))
        if increment != Fraction(expected) or not increment > 0:
            recursion.append(f"d-recursion mismatch at n={n}")
        if n >= 2:
            bound = float(cert.d[n - 1]) / 2.0 ** (n - 1) * (1.0 - 2.0 ** (-1.0 / (n - 1)))
            if not float(increment) <= bound:
                recursion.append(f"condition (c) fails at n={n - 1}")
    record("condition_c", recursion)

    lphi2: List[str] = []
    for n in range(1, n_max + 1):
        if float(cert.d[n] / cert.d_upper) ** n < 0.5 - LPHI2_SLACK:
            lphi2.append(f"(d_n/d)^n < 1/2 at n={n}")
    record("lphi2", lphi2)

    bracket: List[str] = []
    d_last = cert.d[-1]
    if not cert.d_upper >= d_last:
        bracket.append("d_upper below d_{n_max}")
    if float(cert.d_upper / d_last) > 2.0 ** (1.0 / n_max) * (1.0 + 1e-15):
        bracket.append("d_upper above 2^(1/n_max) d_{n_max}")
    for n in range(1, n_max):
        tail = float(d_last - cert.d[n])
        allowed = (1.0 - 2.0 ** (-1.0 / n)) * float(d_last) * 2.0 ** (1 - n)
        if tail > allowed * (1.0 + 1e-12):
            bracket.append(f"tail estimate d - d_n fails at n={n}")
    record("bracket", bracket)

    passed = not failures
    log_structured(
        logger, logging.INFO if passed else logging.ERROR, "certificate verified",
        passed=passed, failures=len(failures),
    )
    return CertificateVerification(passed, checks, tuple(failures))


# ----------------------------------------------------------------------
# Integral reduction and certified bounds
# ----------------------------------------------------------------------
def _power_difference(e: Fraction, s: Fraction, n: int) -> float:
    """e^n - s^n = (e - s) * sum_k e^k s^(n-1-k), with e - s taken exactly."""
    ef, sf = float(e), float(s)
    return float(e - s) * math.fsum(ef**k * sf ** (n - 1 - k) for k in range(n))


def exact_power_integral(f: SimpleFunction, n: int, scale_: float, phi: OrliczFunction) -> float:
    """Integral over [0, 1] of y^(n-1) phi(|f(y)| / scale_).

    Piecewise closed form sum_i phi(|v_i| / scale_) (e_i^n - s_i^n) / n.
    """
    if int(n) < 1:
        raise PreconditionError("n", f"must be >= 1, got {n}")
    if not scale_ > 0:
        raise PreconditionError("scale", f"must be positive, got {scale_}")
    n = int(n)
    terms = [
        float(phi.values(abs(v) / scale_)) * _power_difference(e, s, n) / n
        for s, e, v in f.pieces()
        if v != 0.0
    ]
    return math.fsum(terms)


def reduction_lower_bound(cert: CounterexampleCertificate, n: int) -> float:
    """sum_{m<=n} of the y^(n-1) integral of phi(f / (m C_n)); a lower bound for the modular of h_n / C_n."""
    _check_depth(cert, n)
    f = cert.f
    c_n = cert.C_n(n)
    return math.fsum(exact_power_integral(f, n, m * c_n, cert.phi) for m in range(1, n + 1))


def _check_depth(cert: CounterexampleCertificate, n: int) -> None:
    if not 1 <= n <= cert.n_max:
        raise PreconditionError("n", f"need 1 <= n <= n_max={cert.n_max}, got {n}")


def tail_share(cert: CounterexampleCertificate, n: int) -> float:
    """(S_n - S_{n_max+1}) / S_n: the part of S_n the truncated tail keeps."""
    s_n = cert.S_n(n)
    return (s_n - cert.S[-1]) / s_n


def _truncated_tail(cert: CounterexampleCertificate, n: int) -> float:
    beta = cert.beta
    return math.fsum(
        float(cert.phi.values(cert.a_n(i))) * float(beta[i] - beta[i - 1])
        for i in range(n, cert.n_max + 1)
    )


def certify_modular_lower_bound(
    cert: CounterexampleCertificate,
    n: int,
    tail: str = "truncated",
    min_share: float = MIN_TAIL_SHARE,
) -> float:
    """Lower bound for the modular of h_n / C_n.

    ``truncated`` sums only the stored pieces i = n..n_max and is certified
    for the f the certificate describes. ``conditional`` adds the
    continuation's contribution S_{n_max+1} / d_upper; the continuation is
    never built or checked, so that figure holds only on the assumption
    that the construction goes on past n_max.

    Raises:
        TailDominatedError: n >= n_max, or the truncated tail keeps less than min_share of S_n
    """
    if tail not in TAIL_MODES:
        raise PreconditionError("tail", f"expected one of {TAIL_MODES}, got {tail!r}")
    _check_depth(cert, n)
    if n >= cert.n_max:
        raise TailDominatedError("n", f"n={n} leaves no tail below n_max={cert.n_max}")
    share = tail_share(cert, n)
    if share < min_share:
        raise TailDominatedError(
            "n", f"truncated tail keeps {share:.3%} of S_n at n={n}, need {min_share:.0%}; raise n_max",
            share=share,
        )
    c_n = cert.C_n(n)
    factor = harmonic(n) / (4.0 * c_n)
    total = _truncated_tail(cert, n)
    if tail == "conditional":
        total += cert.S[-1] / float(cert.d_upper)
    return factor * total


def norm_lower_bound(
    cert: CounterexampleCertificate,
    n: int,
    eps: float = PREMISE_EPS,
    tail: str = "truncated",
    min_share: float = MIN_TAIL_SHARE,
) -> float:
    """C_n times the modular bound, capped at C_n.

    The bound reaches a fraction of 1/(4 d_upper); the premise asks that
    fraction to be within eps of what the tail mode can reach (the kept
    share of S_n when truncated, all of it when conditional).

    Raises:
        PremiseNotMetError: the achieved fraction is below (1 - eps) times the reachable one
    """
    bound = certify_modular_lower_bound(cert, n, tail, min_share)
    fraction = 4.0 * float(cert.d_upper) * bound
    reachable = tail_share(cert, n) if tail == "truncated" else 1.0
    if fraction < (1.0 - eps) * reachable:
        raise PremiseNotMetError(
            "n",
            f"modular bound reaches {fraction:.4f} of 1/(4d) at n={n}, "
            f"below (1 - eps) * {reachable:.4f} with eps = {eps:g}",
            fraction=fraction, reachable=reachable,
        )
    log_structured(
        logger, logging.DEBUG, "norm bound premise",
        n=n, tail=tail, eps_used=max(0.0, 1.0 - fraction / reachable),
    )
    return cert.C_n(n) * min(bound, 1.0)


def bracket_sensitivity(cert: CounterexampleCertificate, n: int) -> Dict[str, float]:
    """Certified and conditional norm bounds with d taken at either end of the bracket.

    A larger d only weakens each figure.
    """
    _check_depth(cert, n)
    d_low, d_high = cert.d_bracket
    c_n = cert.C_n(n)
    kept = harmonic(n) * (cert.S_n(n) - cert.S[-1]) / (4.0 * c_n)

    def certified(d: Fraction) -> float:
        return c_n * min(kept / float(d), 1.0)

    return {
        "n": n,
        "at_lower": certified(d_low),
        "at_upper": certified(d_high),
        "conditional_at_lower": c_n / (4.0 * float(d_low)),
        "conditional_at_upper": c_n / (4.0 * float(d_high)),
    }


def bound_records(
    cert: CounterexampleCertificate,
    ns: Sequence[int],
    eps: float = PREMISE_EPS,
    min_share: float = MIN_TAIL_SHARE,
) -> List[Dict[str, Any]]:
    """One row per n: the certified bounds, then the figures conditional on the continuation."""
    rows = []
    for n in ns:
        rows.append(
            {
                "n": n,
                "C_n": cert.C_n(n),
                "tail_share": tail_share(cert, n),
                "modular_lower": certify_modular_lower_bound(cert, n, "truncated", min_share),
                "norm_lower": norm_lower_bound(cert, n, eps, "truncated", min_share),
                "modular_conditional_on_continuation": certify_modular_lower_bound(cert, n, "conditional", min_share),
                "norm_conditional_on_continuation": norm_lower_bound(cert, n, eps, "conditional", min_share),
                "reference": 1.0 / (4.0 * float(cert.d_upper)),
            }
        )
    return rows


def certificate_sequence(cert: CounterexampleCertificate) -> FunctionSequence:
    """The disjoint pieces a_i chi[beta_{i-1}, beta_i), each divided by its norm."""
    beta = cert.beta

    def generate(k: int) -> SimpleFunction:
        piece = indicator(beta[k - 1], beta[k], cert.a_n(k))
        return scale(1.0 / luxemburg_norm(cert.phi, piece), piece)

    return FunctionSequence(generate, True, f"counterexample({cert.phi.label}, n_max={cert.n_max})", cert.n_max)


# ----------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class MonteCarloReport:
    n: int
    samples: int
    seed: int
    estimate: float
    stderr: float
    certified_bound: float
    exact_modular: Optional[float]
    consistent: bool
    matches_exact: Optional[bool]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "certified_bound": self.certified_bound,
            "exact_modular": self.exact_modular,
            "consistent": self.consistent,
            "matches_exact": self.matches_exact,
        }


def _mc_chunk(
    rng: np.random.Generator,
    size: int,
    n: int,
    values: np.ndarray,
    measures: np.ndarray,
    proposal: np.ndarray,
    phi: OrliczFunction,
    c_n: float,
) -> np.ndarray:
    idx = rng.choice(values.size, size=(size, n), p=proposal)
    draws = values[idx]
    averages = np.cumsum(draws, axis=1) / np.arange(1, n + 1, dtype=float)
    h = np.max(averages, axis=1)
    weights = np.prod(measures[idx] / proposal[idx], axis=1)
    return phi.values(h / c_n) * weights


def mc_sanity_check(
    cert: CounterexampleCertificate,
    n: int,
    samples: int,
    seed: int,
    chunk_size: int = MC_CHUNK_SIZE,
    mixture: float = MC_MIXTURE,
    f: Optional[SimpleFunction] = None,
) -> MonteCarloReport:
    """Importance-sampled estimate of the modular of h_n / C_n on [0, 1]^n.

    Coordinates pick pieces from the mixture (1 - mixture) * |piece| +
    mixture / pieces, so short tall pieces are sampled. Chunk k draws from
    Philox seeded with the k-th child of SeedSequence(seed), so the estimate
    does not depend on how chunks are scheduled.

    ``f`` replaces the certificate's function (used for degenerate checks).
    """
    if not 1 <= n <= MC_MAX_DIMENSION:
        raise PreconditionError("n", f"dimension must be in [1, {MC_MAX_DIMENSION}], got {n}")
    if int(samples) < MC_MIN_SAMPLES:
        raise PreconditionError("samples", f"need at least {MC_MIN_SAMPLES}, got {samples}")
    if not 0.0 <= mixture < 1.0:
        raise PreconditionError("mixture", f"must be in [0, 1), got {mixture}")
    if int(chunk_size) < 1:
        raise PreconditionError("chunk_size", f"must be >= 1, got {chunk_size}")
    _check_depth(cert, n)
    samples = int(samples)

    target = cert.f if f is None else f
    values = np.abs(target.value_array())
    measures = target.measure_array()
    proposal = (1.0 - mixture) * measures + mixture / values.size
    proposal = proposal / proposal.sum()
    c_n = cert.C_n(n)

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    children = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    ys = np.concatenate([
        _mc_chunk(np.random.Generator(np.random.Philox(child)), size, n, values, measures, proposal, cert.phi, c_n)
        for child, size in zip(children, sizes)
    ])
    estimate = float(np.mean(ys))
    stderr = float(np.std(ys, ddof=1) / math.sqrt(samples))

    if f is None and n < cert.n_max and tail_share(cert, n) >= MIN_TAIL_SHARE:
        bound = certify_modular_lower_bound(cert, n, "truncated")
    else:
        bound = 0.0
    consistent = estimate + 3.0 * stderr >= bound

    exact = None
    matches = None
    if n == 1:
        exact = modular(cert.phi, scale(1.0 / c_n, target))
        matches = abs(estimate - exact) <= 3.0 * stderr + 1e-12 * max(1.0, abs(exact))

    log_structured(
        logger, logging.INFO if consistent else logging.ERROR, "monte carlo check",
        n=n, samples=samples, seed=seed, estimate=estimate, stderr=stderr, bound=bound,
    )
    return MonteCarloReport(n, samples, int(seed), estimate, stderr, bound, exact, consistent, matches)


__all__ = [
    "CounterexampleCertificate",
    "CertificateVerification",
    "MonteCarloReport",
    "TAIL_MODES",
    "harmonic",
    "build_certificate",
    "verify_certificate",
    "exact_power_integral",
    "reduction_lower_bound",
    "tail_share",
    "certify_modular_lower_bound",
    "norm_lower_bound",
    "bracket_sensitivity",
    "bound_records",
    "certificate_sequence",
    "mc_sanity_check",
]
