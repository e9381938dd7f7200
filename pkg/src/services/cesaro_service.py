"""
🔁 Cesaro Service - order-boundedness diagnostics and Cesaro inequalities
"""

from typing import Optional

from . import BaseService, ServiceResult
from ..config_schema import SEEDED_SEQUENCE_KINDS, RunConfig, SequenceSpec
from ..core.cesaro import (
    FunctionSequence,
    closed_cesaro_modular_check,
    diagnose_order_boundedness,
    disjoint_p_convex_bound_check,
    sup_ces_inequality_check,
)
from ..core.counterexample import build_certificate, certificate_sequence
from ..core.errors import PreconditionError
from ..core.orlicz import OrliczFunction
from ..core.simplefn import SimpleFunction


def build_sequence(spec: SequenceSpec, phi: Optional[OrliczFunction]) -> FunctionSequence:
    """Turn a validated SequenceSpec into a FunctionSequence."""
    if spec.kind == "dyadic-blocks":
        if spec.normalize and phi is None:
            raise PreconditionError("sequence.normalize", "normalized dyadic blocks need phi")
        return FunctionSequence.dyadic_blocks(phi if spec.normalize else None, spec.height)
    if spec.kind == "seeded-disjoint":
        return FunctionSequence.seeded_disjoint_blocks(spec.seed)
    if spec.kind == "seeded-steps":
        return FunctionSequence.seeded_random_steps(spec.seed)
    if spec.kind == "geometric":
        return FunctionSequence.geometric(SimpleFunction.from_triples(spec.base), spec.ratio)
    if spec.kind == "explicit":
        return FunctionSequence.explicit(
            [SimpleFunction.from_triples(t) for t in spec.functions], spec.disjoint
        )
    if spec.kind == "counterexample":
        if phi is None:
            raise PreconditionError("phi", "a counterexample-derived sequence needs phi")
        return certificate_sequence(build_certificate(phi, spec.n_max))
    return FunctionSequence.zeros()


class CesaroService(BaseService):
    """Commands of the ``cesaro`` group."""

    def __init__(self):
        super().__init__("cesaro")
        self.commands = {
            "diagnose": self.diagnose,
            "supineq": self.supineq,
            "pconvex": self.pconvex,
            "closedbound": self.closedbound,
        }

    def diagnose(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_sequence(params.sequence, phi)
        report = diagnose_order_boundedness(phi, seq, params.N, params.tol)
        return self._success_result(
            data={"sequence": seq.label, **report.to_dict()},
            message=(
                f"{report.verdict.value} over N={params.N} "
                f"(sup norm {report.sup_norms[-1]:.6g}, slope {report.divergence_slope:.4g})"
            ),
            rows=report.to_records(),
            summary={
                "verdict": report.verdict.value,
                "last_sup_norm": report.sup_norms[-1],
                "growth_ratio": report.growth_ratio,
                "divergence_slope": report.divergence_slope,
            },
        )

    def supineq(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        phi = config.phi.build() if config.phi is not None else None
        rows = []
        first_failure = None
        single = None
        for trial in range(params.trials):
            spec = params.sequence
            if spec.kind in SEEDED_SEQUENCE_KINDS:
                spec = spec.model_copy(update={"seed": spec.seed + trial})
            seq = build_sequence(spec, phi)
            report = sup_ces_inequality_check(seq.prefix(params.K), params.N)
            rows.append({
                "trial": trial,
                "seed": spec.seed,
                "holds": report.holds,
                "max_violation": report.max_violation,
            })
            if params.trials == 1:
                single = report.to_dict()
            if not report.holds and first_failure is None:
                first_failure = report.to_dict()

        violations = sum(1 for r in rows if not r["holds"])
        data = {"trials": rows, "violations": violations}
        if single is not None:
            data["report"] = single
        if first_failure is not None:
            data["first_failure"] = first_failure
        return self._success_result(
            data=data,
            message=f"supremum inequality N={params.N}, K={params.K}: {violations}/{len(rows)} trials violated",
            rows=rows,
            summary={"trials": len(rows), "violations": violations},
            check_passed=violations == 0,
        )

    def pconvex(self, config: RunConfig) -> ServiceResult:
        params = config.typed_params()
        seq = build_sequence(params.sequence, OrliczFunction.power(params.p))
        report = disjoint_p_convex_bound_check(params.p, seq, params.n, params.m, params.tol)
        return self._success_result(
            data=report.to_dict(),
            message=(
                f"p-convex bound p={params.p:g}, n={params.n}, m={params.m}: "
                f"{'holds' if report.holds else 'FAILS'} (lhs {report.lhs:.6g} <= rhs {report.rhs:.6g})"
            ),
            rows=[report.to_dict()],
            summary={"holds": report.holds, "lhs": report.lhs, "rhs": report.rhs},
            check_passed=report.holds,
        )

    def closedbound(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_sequence(params.sequence, phi)
        report = closed_cesaro_modular_check(phi, seq, params.K, params.N, params.tol)
        rows = [
            {"class": ell, "modular": value} for ell, value in enumerate(report.class_modulars)
        ]
        if not report.premise_met:
            message = f"premise not met: a class modular exceeds 1 (max {max(report.class_modulars):.6g})"
        else:
            message = (
                f"modular chain N={params.N}, K={params.K}: {'holds' if report.holds else 'FAILS'} "
                f"({report.lhs_modular:.6g} <= {report.class_sum_modular:.6g} <= {params.N})"
            )
        return self._success_result(
            data=report.to_dict(),
            message=message,
            rows=rows,
            summary={"premise_met": report.premise_met, "holds": report.holds, "slack": report.slack},
            check_passed=bool(report.premise_met and report.holds),
        )
