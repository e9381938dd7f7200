"""
🧮 DH Service - eligible sequences, b-tables and the (dH) series test
"""

from . import BaseService, ServiceResult
from ..config_schema import BlocksSpec, RunConfig
from ..core.dhtest import (
    EligibleSequence,
    b_table,
    builtin_sequence,
    cross_check_series_identity,
    dh_series_test,
    realize,
    realized_norms,
    weak_null_criterion,
)


def build_blocks(spec: BlocksSpec, count: int) -> EligibleSequence:
    """Builtin generators produce exactly ``count`` blocks; records are used as given."""
    if spec.builtin is not None:
        return builtin_sequence(spec.builtin, count, spec.seed)
    return EligibleSequence.from_records(spec.records)


class DHService(BaseService):
    """Commands of the ``dh`` group."""

    def __init__(self):
        super().__init__("dh")
        self.commands = {
            "table": self.table,
            "test": self.test,
            "realize": self.realize,
            "crosscheck": self.crosscheck,
        }

    def table(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_blocks(params.blocks, params.N)
        table = b_table(phi, seq, params.N, params.M, params.stab_tol)
        weak_null = weak_null_criterion(table, params.weak_null_eps)
        return self._success_result(
            data={"sequence": seq.label, "blocks": seq.to_records(), **table.to_dict(), "weak_null": weak_null.to_dict()},
            message=(
                f"b-table {params.N}x{params.M} for {phi.label}: "
                f"{sum(table.stabilized)}/{table.M} limits stable, weak-null {weak_null.verdict.value}"
            ),
            rows=table.to_rows(),
            summary={
                "stabilized": sum(table.stabilized),
                "weak_null": weak_null.verdict.value,
                "corner": table.b(table.N, table.M),
            },
        )

    def test(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_blocks(params.blocks, params.N)
        report = dh_series_test(phi, seq, params.N, params.M, params.stab_tol)
        return self._success_result(
            data={"sequence": seq.label, **report.to_dict()},
            message=f"dH series for {phi.label}: {report.verdict.value}, partial sum {report.partial_sum:.10g} at M={report.M}",
            rows=report.to_records(),
            summary={
                "verdict": report.verdict.value,
                "partial_sum": report.partial_sum,
                "extrapolated_limit": report.extrapolated_limit,
            },
        )

    def realize(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_blocks(params.blocks, params.K)
        realization = realize(phi, seq, params.K, params.max_denominator, params.tol)
        norms = realized_norms(phi, realization, params.tol)
        rows = [
            {
                "n": n,
                "norm": norm,
                "measure": str(sum(realization.measures[n - 1])),
                "within_tol": abs(norm - 1.0) <= realization.norm_tol,
            }
            for n, norm in enumerate(norms, start=1)
        ]
        unit = all(row["within_tol"] for row in rows)
        return self._success_result(
            data={"sequence": seq.label, **realization.to_dict(), "norms": norms},
            message=(
                f"realized {params.K} blocks in {float(realization.used_measure):.6g} of [0, 1]; "
                f"unit norms {'confirmed' if unit else 'NOT confirmed'} within {realization.norm_tol:.2g}"
            ),
            rows=rows,
            summary={"K": params.K, "used_measure": float(realization.used_measure), "unit_norms": unit},
            check_passed=unit,
        )

    def crosscheck(self, config: RunConfig) -> ServiceResult:
        phi = config.phi.build()
        params = config.typed_params()
        seq = build_blocks(params.blocks, params.K)
        report = cross_check_series_identity(phi, seq, params.K, params.scale, params.max_denominator, params.tol)
        return self._success_result(
            data={"sequence": seq.label, **report.to_dict()},
            message=(
                f"series identity K={report.K}, C={report.scale}: lhs {report.lhs:.12g}, rhs {report.rhs:.12g} "
                f"({'agree' if report.agrees else 'DISAGREE'})"
            ),
            rows=[report.to_dict()],
            summary={"lhs": report.lhs, "rhs": report.rhs, "agrees": report.agrees},
            check_passed=report.agrees,
        )
