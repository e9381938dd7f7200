"""
Tests for eligible sequences, the b-table, the weak-null criterion, the
series test and the realization as disjoint step functions.
"""

import math

import numpy as np
import pytest

from src.core.dhtest import (
    Block,
    EligibleSequence,
    SeriesVerdict,
    WeakNullVerdict,
    b_table,
    builtin_sequence,
    cross_check_series_identity,
    dh_series_test,
    realize,
    realized_norms,
    series_from_limits,
    weak_null_criterion,
)
from src.core.errors import (
    CapacityExceededError,
    DegenerateInputError,
    PreconditionError,
    UnstabilizedError,
)
from src.core.orlicz import OrliczFunction


class TestEligibleSequences:
    @pytest.mark.parametrize(
        "values, weights",
        [
            ((), ()),
            ((2.0, 1.0), ("1/2", "1/2")),
            ((1.0, -2.0), ("1/2", "1/2")),
            ((1.0, 2.0), ("1/2", "1/3")),
            ((1.0, 2.0), ("1", "0")),
        ],
    )
    def test_malformed_blocks(self, values, weights):
        with pytest.raises(PreconditionError):
            Block(values, weights)

    def test_blocks_must_be_separated(self):
        with pytest.raises(PreconditionError, match="not separated"):
            EligibleSequence.from_records([{"values": [1, 3]}, {"values": [2]}])

    def test_records_default_to_uniform_weights(self):
        seq = EligibleSequence.from_records([{"values": [1, 2, 3]}])
        assert sum(seq.blocks[0].weights) == 1
        assert seq.to_records()[0]["weights"] == ["1/3", "1/3", "1/3"]

    def test_builtin_lookup(self):
        assert len(builtin_sequence("geometric-blocks", 4)) == 4
        with pytest.raises(PreconditionError) as exc:
            builtin_sequence("seeded", 4)
        assert exc.value.param == "seed"
        with pytest.raises(PreconditionError):
            builtin_sequence("fibonacci", 4)

    def test_head_beyond_length(self):
        with pytest.raises(PreconditionError):
            EligibleSequence.singleton_powers(3).head(4)


class TestBTable:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_power_rows_are_m_to_one_minus_p(self, p, seed):
        table = b_table(OrliczFunction.power(p), EligibleSequence.seeded(seed, 8), 8, 50)
        expected = np.arange(1, 51, dtype=float) ** (1.0 - p)
        assert np.max(np.abs(table.values - expected[None, :])) <= 1e-12
        assert np.all(table.values[:, 0] == 1.0)
        assert np.all(np.diff(table.values, axis=1) <= 0)
        assert table.all_stabilized

    def test_rows_serialize_by_column(self):
        table = b_table(OrliczFunction.linear(), EligibleSequence.geometric_blocks(3), 3, 4)
        rows = table.to_rows()
        assert rows[0]["n"] == 1
        assert set(rows[0]) == {"n", "1", "2", "3", "4"}

    def test_vanishing_phi_is_degenerate(self):
        phi = OrliczFunction.piecewise_linear([(0, 0), (10, 0), (11, 1)])
        with pytest.raises(DegenerateInputError):
            b_table(phi, EligibleSequence.singleton_powers(3), 3, 4)

    def test_size_precondition(self):
        with pytest.raises(PreconditionError):
            b_table(OrliczFunction.linear(), EligibleSequence.singleton_powers(3), 0, 4)


class TestWeakNull:
    def test_quadratic_is_consistent(self):
        table = b_table(OrliczFunction.power(2), EligibleSequence.singleton_powers(10), 10, 40)
        report = weak_null_criterion(table)
        assert report.verdict is WeakNullVerdict.CONSISTENT
        assert report.quadrant_max < 0.05

    def test_linear_is_refuted(self):
        table = b_table(OrliczFunction.linear(), EligibleSequence.singleton_powers(10), 10, 40)
        report = weak_null_criterion(table)
        assert report.verdict is WeakNullVerdict.REFUTED
        assert report.quadrant_min == pytest.approx(1.0)

    def test_single_row_is_inconclusive(self):
        table = b_table(OrliczFunction.linear(), EligibleSequence.singleton_powers(1), 1, 10)
        assert weak_null_criterion(table).verdict is WeakNullVerdict.INCONCLUSIVE


class TestSeries:
    def test_quadratic_series_converges_to_basel(self):
        report = dh_series_test(OrliczFunction.power(2), EligibleSequence.singleton_powers(4), 4, 10_000)
        assert report.verdict is SeriesVerdict.CONVERGENT
        assert abs(report.partial_sum - math.pi**2 / 6) <= 2e-4
        assert report.decay_exponent == pytest.approx(2.0, abs=1e-6)
        assert report.extrapolated_limit == pytest.approx(math.pi**2 / 6, abs=1e-6)

    def test_linear_series_follows_the_harmonic_series(self):
        report = dh_series_test(OrliczFunction.linear(), EligibleSequence.singleton_powers(4), 4, 1000)
        assert report.verdict is SeriesVerdict.DIVERGENT
        assert report.max_harmonic_deviation <= 1e-12
        assert report.extrapolated_limit is None
        assert len(report.to_records()) == 1000

    def test_slowly_stabilizing_rows_are_reported(self):
        with pytest.raises(UnstabilizedError) as exc:
            dh_series_test(OrliczFunction.power_log(1), EligibleSequence.singleton_powers(6), 6, 10)
        assert exc.value.context["m"] == 2
        assert exc.value.exit_code == 3

    def test_short_series_is_inconclusive(self):
        report = series_from_limits([1.0, 0.5, 0.25])
        assert report.verdict is SeriesVerdict.INCONCLUSIVE
        assert math.isnan(report.decay_exponent)


class TestRealization:
    def test_quadratic_pieces_have_unit_norm(self):
        phi = OrliczFunction.power(2)
        realization = realize(phi, EligibleSequence.geometric_blocks(5), 5)
        assert realization.used_measure < 1
        for norm in realized_norms(phi, realization):
            assert norm == pytest.approx(1.0, abs=realization.norm_tol + 1e-8)

    def test_realized_functions_are_disjoint(self):
        realization = realize(OrliczFunction.power(2), EligibleSequence.singleton_powers(6), 6)
        supports = [f.support_measure() for f in realization.functions]
        assert sum(supports) == realization.used_measure

    def test_block_that_does_not_fit(self):
        seq = EligibleSequence.from_records([{"values": [0.5]}])
        with pytest.raises(CapacityExceededError) as exc:
            realize(OrliczFunction.linear(), seq, 1)
        assert exc.value.context["block"] == 1

    def test_series_identity_on_quadratic_blocks(self):
        report = cross_check_series_identity(OrliczFunction.power(2), EligibleSequence.singleton_powers(8), 8)
        assert report.agrees
        assert report.lhs == pytest.approx(math.fsum(1.0 / n**2 for n in range(1, 9)), rel=1e-12)

    def test_identity_needs_a_positive_scale(self):
        with pytest.raises(PreconditionError):
            cross_check_series_identity(OrliczFunction.power(2), EligibleSequence.singleton_powers(2), 2, scale=0)
