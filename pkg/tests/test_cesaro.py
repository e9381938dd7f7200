"""
Tests for Cesaro averages, order-boundedness diagnostics and the three
deterministic checks on disjoint sequences.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from src.core.cesaro import (
    FunctionSequence,
    Trend,
    cesaro_average,
    closed_cesaro_modular_check,
    diagnose_order_boundedness,
    disjoint_p_convex_bound_check,
    dyadic_block,
    running_averages,
    running_suprema,
    sup_ces_inequality_check,
)
from src.core.errors import InvariantViolationError, PreconditionError
from src.core.orlicz import OrliczFunction
from src.core.simplefn import constant, indicator, max_abs_difference, sum_all


class TestSequences:
    def test_dyadic_blocks_tile_the_interval(self):
        assert dyadic_block(1) == (Fraction(0), Fraction(1, 2))
        assert dyadic_block(3) == (Fraction(3, 4), Fraction(7, 8))

    def test_average_of_first_two_blocks(self):
        average = cesaro_average(FunctionSequence.dyadic_blocks(), 2)
        assert average.ends == (Fraction(3, 4), Fraction(1))
        assert average.values == (0.5, 0.0)

    def test_average_is_linear_in_the_sequence(self):
        rng = np.random.default_rng(2026)
        for trial in range(40):
            n = int(rng.integers(1, 25))
            alpha, beta = rng.normal(size=2)
            f = FunctionSequence.seeded_random_steps(2 * trial)
            g = FunctionSequence.seeded_random_steps(2 * trial + 1)
            mixed = FunctionSequence.explicit(
                [sum_all([f.term(k), g.term(k)], [alpha, beta]) for k in range(1, n + 1)]
            )
            expected = sum_all([cesaro_average(f, n), cesaro_average(g, n)], [alpha, beta])
            average = cesaro_average(mixed, n)
            size = max(1.0, max(abs(v) for v in expected.values))
            assert max_abs_difference(average, expected) <= 1e-12 * size, trial

    def test_running_averages_and_suprema(self):
        # one refined piece, terms 3, -5, 2
        values = np.array([[3.0, -5.0, 2.0]])
        assert running_averages(values).tolist() == [[3.0, -1.0, 0.0]]
        assert running_suprema(values).tolist() == [[3.0, 3.0, 3.0]]

    def test_explicit_sequence_has_a_length(self):
        seq = FunctionSequence.explicit([constant(1.0)])
        with pytest.raises(PreconditionError) as exc:
            seq.term(2)
        assert exc.value.param == "N"
        with pytest.raises(PreconditionError):
            seq.term(0)

    def test_declared_disjoint_sequence_with_overlap_is_rejected(self):
        seq = FunctionSequence.explicit(
            [indicator(0, "1/2"), indicator("1/4", 1)], declared_disjoint=True
        )
        assert seq.first_overlap(2) == (1, 2)
        with pytest.raises(PreconditionError, match="terms 1 and 2"):
            seq.require_disjoint(2)

    def test_seeded_sequences_are_stateless(self):
        a = FunctionSequence.seeded_random_steps(7)
        b = FunctionSequence.seeded_random_steps(7)
        assert a.term(5) == b.term(5)
        assert FunctionSequence.seeded_disjoint_blocks(3).first_overlap(12) is None


class TestOrderBoundedness:
    def test_zero_sequence_is_bounded(self):
        report = diagnose_order_boundedness(OrliczFunction.power(2), FunctionSequence.zeros(), 8)
        assert report.verdict is Trend.BOUNDED
        assert report.sup_norms == (0.0,) * 8
        assert report.to_dict()["note"].startswith("finite truncation")

    def test_disjoint_dyadic_blocks_have_bounded_suprema(self):
        # ||sup_{i<=n} |A_i|||_1 = sum_{k<=n} 2^-k / k -> log 2
        report = diagnose_order_boundedness(OrliczFunction.linear(), FunctionSequence.dyadic_blocks(), 40)
        assert report.verdict is Trend.BOUNDED
        assert report.sup_norms[-1] == pytest.approx(math.log(2.0), abs=1e-8)
        assert report.gaps_shrink

    def test_geometric_growth_is_unbounded(self):
        seq = FunctionSequence.geometric(constant(1.0), 2.0)
        report = diagnose_order_boundedness(OrliczFunction.power(2), seq, 8)
        assert report.verdict is Trend.UNBOUNDED
        assert report.divergence_slope > 0.05
        assert report.sup_norms[0] == pytest.approx(2.0, abs=1e-8)

    def test_records_cover_every_prefix(self):
        report = diagnose_order_boundedness(OrliczFunction.linear(), FunctionSequence.dyadic_blocks(), 5)
        records = report.to_records()
        assert [r["n"] for r in records] == [1, 2, 3, 4, 5]
        assert records[-1]["gap"] == 0.0

    def test_short_prefix_is_rejected(self):
        with pytest.raises(PreconditionError):
            diagnose_order_boundedness(OrliczFunction.linear(), FunctionSequence.zeros(), 1)


class TestPConvexBound:
    def test_dyadic_blocks_satisfy_the_bound(self):
        report = disjoint_p_convex_bound_check(2.0, FunctionSequence.dyadic_blocks(), 2, 5)
        assert report.holds
        assert report.lhs == pytest.approx(math.sqrt(1 / 72 + 1 / 256 + 1 / 800), rel=1e-7)
        assert report.identity_error <= 1e-12
        assert report.slack > 0

    def test_overlapping_terms_break_the_absolute_value_identity(self, monkeypatch):
        # opposite signs on [1/4, 1/2) cancel inside |sum| but not in sum |.|
        seq = FunctionSequence.explicit(
            [indicator(0, "1/2", 1.0), indicator("1/4", 1, -1.0)], declared_disjoint=True
        )
        monkeypatch.setattr(FunctionSequence, "require_disjoint", lambda self, count: None)
        with pytest.raises(InvariantViolationError) as exc:
            disjoint_p_convex_bound_check(2.0, seq, 1, 2)
        assert exc.value.param == "seq"
        assert exc.value.exit_code == 2

    def test_non_disjoint_sequence_is_a_precondition_error(self):
        with pytest.raises(PreconditionError):
            disjoint_p_convex_bound_check(2.0, FunctionSequence.seeded_random_steps(1), 2, 5)

    @pytest.mark.parametrize("p, n, m", [(1.0, 1, 2), (2.0, 3, 3), (2.0, 0, 4)])
    def test_argument_ranges(self, p, n, m):
        with pytest.raises(PreconditionError):
            disjoint_p_convex_bound_check(p, FunctionSequence.dyadic_blocks(), n, m)


class TestSupremumInequality:
    @pytest.mark.slow
    def test_seeded_runs_never_violate(self):
        start = time.perf_counter()
        for seed in range(500):
            N = 1 + seed % 8
            K = N + seed % (65 - N)
            if seed % 2:
                seq = FunctionSequence.seeded_disjoint_blocks(seed)
            else:
                seq = FunctionSequence.seeded_random_steps(seed)
            report = sup_ces_inequality_check(seq.prefix(K), N)
            assert report.holds, (seed, report.first_violation)
            assert report.max_violation <= 1e-12
        assert time.perf_counter() - start < 30.0

    def test_report_serializes_both_sides(self):
        fs = FunctionSequence.dyadic_blocks().prefix(4)
        payload = sup_ces_inequality_check(fs, 2).to_dict()
        assert payload["first_violation"] is None
        assert payload["lhs"] and payload["rhs"]

    def test_N_must_fit_the_prefix(self):
        with pytest.raises(PreconditionError):
            sup_ces_inequality_check([constant(1.0)], 2)


class TestClosedCesaroModular:
    def test_unit_height_misses_the_premise(self):
        # each class modular is sum_{j<=4} 1/j^2 > 1
        seq = FunctionSequence.dyadic_blocks(OrliczFunction.power(2), height=1.0)
        report = closed_cesaro_modular_check(OrliczFunction.power(2), seq, 16, 4)
        assert not report.premise_met
        assert report.holds is None
        assert report.class_modulars[0] == pytest.approx(1 + 1 / 4 + 1 / 9 + 1 / 16, rel=1e-5)

    def test_half_height_bound_holds(self):
        seq = FunctionSequence.dyadic_blocks(OrliczFunction.power(2), height=0.5)
        report = closed_cesaro_modular_check(OrliczFunction.power(2), seq, 16, 4)
        assert report.premise_met
        assert report.holds
        assert report.lhs_modular <= report.class_sum_modular <= 4
        assert report.additivity_error <= 1e-9
        assert report.to_dict()["bound"] == 4

    def test_requires_disjoint_terms(self):
        with pytest.raises(PreconditionError):
            closed_cesaro_modular_check(
                OrliczFunction.power(2), FunctionSequence.constant_terms(constant(0.1)), 8, 2
            )
