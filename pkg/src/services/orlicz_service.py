"""
📐 Orlicz Service - conjugates, validation and growth probes
"""

from . import BaseService, ServiceResult
from ..config_schema import RunConfig
from ..core.orlicz import (
    Delta2Verdict,
    closed_form_conjugate,
    conjugate,
    delta2_check,
    kr_dual_delta2_probe,
    kr_escalation,
    validate,
)


class OrliczService(BaseService):
    """Commands of the ``orlicz`` group."""

    def __init__(self):
        super().__init__("orlicz")
        self.commands = {
            "conjugate": self.conjugate,
            "validate": self.validate,
            "delta2": self.delta2,
            "kr-probe": self.kr_probe,
        }

    def conjugate(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        rows = []
        for s in params.s:
            value = conjugate(phi, s, params.tol, params.t_cap, params.slope_margin)
            rows.append({
                "s": s,
                "value": value.value,
                "infinite": value.infinite,
                "maximizer": value.maximizer,
                "slope_estimate": value.slope_estimate,
                "closed_form": closed_form_conjugate(phi, s),
            })
        infinite = sum(1 for r in rows if r["infinite"])
        return self._success_result(
            data={"phi": phi.to_spec(), "values": rows},
            message=f"phi* of {phi.label} at {len(rows)} points, {infinite} infinite",
            rows=rows,
            summary={"points": len(rows), "infinite": infinite},
        )

    def validate(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        report = validate(phi, params.grid_size, params.t_max, params.tol)
        message = "passed" if report.passed else f"{report.violation} violation at t={report.at_t:g}: {report.detail}"
        return self._success_result(
            data=report.to_dict(),
            message=f"{phi.label}: {message}",
            rows=[report.to_dict()],
            summary={"passed": report.passed, "violation": report.violation},
            check_passed=report.passed,
        )

    def delta2(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        report = delta2_check(phi, params.t0, params.t_max, params.grid_size, params.fail_threshold)
        detail = f"C_est={report.c_est:.6g}"
        if report.satisfied is Delta2Verdict.FAILS:
            detail += f", witness t={report.witness_t:g}"
        return self._success_result(
            data=report.to_dict(),
            message=f"delta2 {report.satisfied.value} for {phi.label} ({detail})",
            rows=[report.to_dict()],
            summary={"satisfied": report.satisfied.value, "c_est": report.c_est, "max_ratio": report.max_ratio},
        )

    def kr_probe(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        if params.escalate:
            report = kr_escalation(phi, t_cap=params.t_cap)
            rows = [r.to_dict() for r in report.results]
            data = report.to_dict()
        else:
            results = [kr_dual_delta2_probe(phi, L, params.t_floor, params.t_cap, params.ratio) for L in params.L]
            rows = [r.to_dict() for r in results]
            data = {"results": rows}
        witnessed = sum(1 for r in rows if r["witness_t"] is not None)
        first = next((r["witness_t"] for r in rows if r["witness_t"] is not None), None)
        return self._success_result(
            data=data,
            message=f"dual delta2 probe on {phi.label}: {witnessed}/{len(rows)} witnessed",
            rows=rows,
            summary={"probes": len(rows), "witnessed": witnessed, "first_witness_t": first},
        )
