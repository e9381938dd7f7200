"""
🧪 Counterexample Service - certificates, bounds and Monte Carlo checks
"""

from typing import Any, Dict, Mapping

from . import BaseService, ServiceResult
from ..config_schema import RunConfig
from ..core.counterexample import (
    CounterexampleCertificate,
    bound_records,
    bracket_sensitivity,
    build_certificate,
    mc_sanity_check,
    reduction_lower_bound,
    verify_certificate,
)
from ..core.errors import PreconditionError
from ..utils.validation import InputValidator, require


def certificate_payload(document: Any) -> Mapping[str, Any]:
    """Accept a bare certificate or a ``counterexample build`` report."""
    if not isinstance(document, Mapping):
        raise PreconditionError("certificate", "expected a JSON object")
    if "n_max" in document:
        return document
    result = document.get("result")
    if isinstance(result, Mapping):
        for holder in (result, result.get("data")):
            if isinstance(holder, Mapping) and isinstance(holder.get("certificate"), Mapping):
                return holder["certificate"]
    raise PreconditionError("certificate", "no certificate found in the document")


class CounterexampleService(BaseService):
    """Commands of the ``counterexample`` group."""

    def __init__(self):
        super().__init__("counterexample")
        self.commands = {
            "build": self.build,
            "verify": self.verify,
            "bounds": self.bounds,
            "mc": self.mc,
        }

    def _certificate(self, config: RunConfig) -> CounterexampleCertificate:
        params = config.typed_params()
        return build_certificate(config.phi.build(), params.n_max, params.ratio, params.max_steps, params.start)

    def build(self, config: RunConfig) -> ServiceResult:
        cert = self._certificate(config)
        verification = verify_certificate(cert)
        d_low, d_high = cert.d_bracket
        return self._success_result(
            data={"certificate": cert.to_dict(), "verification": verification.to_dict()},
            message=(
                f"certificate for {cert.phi.label} to n_max={cert.n_max}: a_n_max={cert.a[-1]:.6g}, "
                f"d in [{float(d_low):.9g}, {float(d_high):.9g}], "
                f"{'verified' if verification.passed else 'verification FAILED'}"
            ),
            rows=cert.to_records(),
            summary={
                "n_max": cert.n_max,
                "a_last": cert.a[-1],
                "d_lower": float(d_low),
                "d_upper": float(d_high),
                "verified": verification.passed,
            },
            check_passed=verification.passed,
        )

    def verify(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        document = require(InputValidator.validate_json_document(params.certificate, "certificate"))
        cert = CounterexampleCertificate.from_dict(certificate_payload(document))
        verification = verify_certificate(cert)
        rows = [{"check": name, "passed": ok} for name, ok in verification.checks.items()]
        return self._success_result(
            data={"phi": cert.phi.to_spec(), "n_max": cert.n_max, **verification.to_dict()},
            message=(
                f"certificate ({cert.phi.label}, n_max={cert.n_max}): "
                + ("all checks passed" if verification.passed else f"{len(verification.failures)} failures")
            ),
            rows=rows,
            summary={"passed": verification.passed, "failures": len(verification.failures)},
            check_passed=verification.passed,
        )

    def bounds(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        cert = self._certificate(config)
        rows = bound_records(cert, params.ns, params.premise_eps, params.min_share)
        for row in rows:
            n = row["n"]
            sensitivity = bracket_sensitivity(cert, n)
            row["norm_at_d_lower"] = sensitivity["at_lower"]
            row["norm_at_d_upper"] = sensitivity["at_upper"]
            row["reduction_lower"] = reduction_lower_bound(cert, n)
        norms = [row["norm_lower"] for row in rows]
        data: Dict[str, Any] = {
            "phi": cert.phi.to_spec(),
            "n_max": cert.n_max,
            "d_bracket": [float(x) for x in cert.d_bracket],
            "bounds": rows,
        }
        return self._success_result(
            data=data,
            message=(
                f"certified norm lower bounds for {cert.phi.label}: "
                + ", ".join(f"n={row['n']}: {row['norm_lower']:.6g}" for row in rows)
            ),
            rows=rows,
            summary={
                "depths": len(rows),
                "first_norm_lower": norms[0],
                "last_norm_lower": norms[-1],
                "last_norm_conditional": rows[-1]["norm_conditional_on_continuation"],
            },
        )

    def mc(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        cert = self._certificate(config)
        report = mc_sanity_check(cert, params.n, params.samples, params.seed, params.chunk_size, params.mixture)
        passed = report.consistent and report.matches_exact is not False
        return self._success_result(
            data=report.to_dict(),
            message=(
                f"Monte Carlo n={report.n}: {report.estimate:.6g} +- {report.stderr:.2g} "
                f"vs certified {report.certified_bound:.6g} "
                f"({'consistent' if passed else 'INCONSISTENT'})"
            ),
            rows=[report.to_dict()],
            summary={"estimate": report.estimate, "stderr": report.stderr, "consistent": passed},
            check_passed=passed,
        )
