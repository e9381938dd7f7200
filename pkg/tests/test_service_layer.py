"""
Service layer: command routing, error-to-exit-code mapping and sweeps.

Runs go through the global service manager exactly as the command line
drives it, without touching report files.
"""

import logging

import pytest

from src.config_schema import RunConfig, SweepConfig
from src.services import BaseService, ServiceResult
from src.services.service_manager import get_service_manager
from src.utils.perf_monitor import perf_monitor

QUADRATIC = {"family": "power", "params": [2]}
LINEAR = {"family": "linear"}


@pytest.fixture
def manager():
    return get_service_manager()


class BrokenService(BaseService):
    def __init__(self):
        super().__init__("broken")
        self.commands = {
            "crash": self.crash,
            "reject": self.reject,
        }

    def crash(self):
        raise RuntimeError("boom")

    def reject(self):
        RunConfig.model_validate({"command": "orlicz.nothing"})


class TestServiceResult:
    @pytest.mark.parametrize(
        "result, status",
        [
            (ServiceResult(success=True), "ok"),
            (ServiceResult(success=True, exit_code=2), "check-failed"),
            (ServiceResult(success=False, exit_code=3), "error"),
        ],
    )
    def test_status(self, result, status):
        assert result.status == status

    def test_to_dict_omits_empty_fields(self):
        assert ServiceResult(success=True).to_dict() == {"success": True, "status": "ok", "exit_code": 0}
        payload = ServiceResult(
            success=False, message="bad", error_code="DOMAIN_ERROR", exit_code=3, param="s"
        ).to_dict()
        assert payload["param"] == "s"
        assert payload["error_code"] == "DOMAIN_ERROR"
        assert "data" not in payload


class TestRouting:
    def test_every_group_is_registered(self, manager):
        assert set(manager.services) == {"orlicz", "fn", "cesaro", "counterexample", "dh"}
        assert manager.get_service("sweep") is None

    def test_conjugate_run(self, manager, make_config):
        result = manager.run(make_config("orlicz.conjugate", QUADRATIC, s=[2.0]))
        assert result.success and result.exit_code == 0
        assert result.data["values"][0]["value"] == pytest.approx(1.0, abs=1e-6)
        assert result.summary == {"points": 1, "infinite": 0}
        assert result.rows[0]["closed_form"] == pytest.approx(1.0)

    def test_norm_run(self, manager, make_config):
        result = manager.run(make_config("fn.norm", QUADRATIC, function=[[1, 4, 2.0], [1, 1, 0.0]]))
        assert result.status == "ok"
        assert result.data["norm"] == pytest.approx(1.0, abs=1e-8)
        assert result.data["modular"] == pytest.approx(1.0)

    def test_rearrange_needs_no_phi(self, manager, make_config):
        result = manager.run(make_config("fn.rearrange", function=[[1, 2, 1.0], [1, 1, -3.0]]))
        assert result.status == "ok"
        assert result.data["rearranged"] == [[1, 2, 3.0], [1, 1, 1.0]]
        assert result.summary["sup"] == 3.0

    def test_failed_check_is_a_successful_computation(self, manager, make_config):
        sequence = {"kind": "dyadic-blocks", "normalize": True}
        result = manager.run(make_config("cesaro.closedbound", QUADRATIC, sequence=sequence, K=16, N=4))
        assert result.success
        assert result.status == "check-failed"
        assert result.exit_code == 2
        assert result.summary["premise_met"] is False

    def test_supremum_inequality_trials(self, manager, make_config):
        sequence = {"kind": "seeded-steps", "seed": 11}
        result = manager.run(make_config("cesaro.supineq", sequence=sequence, K=12, N=3, trials=5))
        assert result.exit_code == 0
        assert [row["seed"] for row in result.rows] == [11, 12, 13, 14, 15]
        assert result.data["violations"] == 0

    def test_linear_series_diverges(self, manager, make_config):
        blocks = {"builtin": "singleton-powers"}
        result = manager.run(make_config("dh.test", LINEAR, blocks=blocks, N=4, M=200))
        assert result.exit_code == 0
        assert result.summary["verdict"] == "divergent-trend"
        assert result.summary["extrapolated_limit"] is None

    def test_runs_are_timed(self, manager, make_config):
        before = perf_monitor.summary("orlicz.validate") or {"count": 0, "not_ok": 0}
        manager.run(make_config("orlicz.validate", QUADRATIC))
        after = perf_monitor.summary("orlicz.validate")
        assert after["count"] == before["count"] + 1
        assert after["not_ok"] == before["not_ok"]


class TestErrorMapping:
    def test_unknown_action(self, manager, make_config):
        result = manager.orlicz.execute("laplace", make_config("orlicz.validate", QUADRATIC))
        assert not result.success
        assert result.error_code == "UNKNOWN_COMMAND"
        assert result.exit_code == 3
        assert result.param == "command"

    def test_exhausted_search_keeps_its_context(self, manager, make_config):
        result = manager.run(make_config("counterexample.build", QUADRATIC, n_max=10))
        assert result.status == "error"
        assert result.exit_code == 2
        assert result.error_code == "SEARCH_EXHAUSTED"
        assert result.param == "n"
        assert result.data["n"] == 2

    def test_precondition_is_an_input_error(self, manager, make_config):
        # seeded steps overlap, the bound needs disjoint terms
        sequence = {"kind": "seeded-steps", "seed": 1}
        result = manager.run(make_config("cesaro.pconvex", sequence=sequence, n=2, m=5))
        assert result.exit_code == 3
        assert result.error_code == "PRECONDITION_FAILED"

    def test_numerical_overflow(self, manager, make_config):
        function = [[1, 10**10, 1e-295], [1, 1, 0.0]]
        result = manager.run(make_config("fn.norm", LINEAR, function=function))
        assert result.exit_code == 4
        assert result.error_code == "NUMERICAL_OVERFLOW"

    def test_unreadable_certificate(self, manager, make_config, tmp_path):
        result = manager.run(make_config("counterexample.verify", certificate=str(tmp_path / "absent.json")))
        assert result.exit_code == 3
        assert result.error_code == "INVALID_INPUT"
        assert result.param == "certificate"

    def test_unexpected_exception(self):
        result = BrokenService().execute("crash")
        assert result.error_code == "OPERATION_FAILED"
        assert result.exit_code == 4
        assert result.param == "crash"
        assert "boom" in result.message

    def test_schema_error_inside_a_handler(self):
        result = BrokenService().execute("reject")
        assert result.error_code == "INVALID_CONFIG"
        assert result.exit_code == 3
        assert result.param == "command"


class TestSweeps:
    def _sweep(self, make_config, values):
        return SweepConfig(configs=[make_config("orlicz.conjugate", QUADRATIC, s=[s]) for s in values])

    def test_rows_follow_config_order(self, manager, make_config):
        result = manager.run_sweep(self._sweep(make_config, [4.0, 0.0, 2.0]), workers=2)
        assert result.exit_code == 0
        assert [row["index"] for row in result.rows] == [0, 1, 2]
        assert [row["params.s"] for row in result.rows] == ["[4.0]", "[0.0]", "[2.0]"]
        assert all("phi.family" not in row for row in result.rows)
        assert result.rows[0]["summary.points"] == 1

    def test_failures_are_counted(self, manager, make_config):
        sweep = SweepConfig(configs=[
            make_config("counterexample.build", LINEAR, n_max=5),
            make_config("counterexample.build", QUADRATIC, n_max=5),
        ])
        result = manager.run_sweep(sweep)
        assert result.exit_code == 2
        assert result.summary == {"runs": 2, "failures": 1}
        assert result.rows[1]["error_code"] == "SEARCH_EXHAUSTED"
        assert "error_code" not in result.rows[0]

    def test_sweep_log_carries_run_timings(self, manager, make_config, caplog):
        with caplog.at_level(logging.INFO, logger="orliczlab.service_manager"):
            manager.run_sweep(self._sweep(make_config, [1.0, 3.0]))
        finished = [r.getMessage() for r in caplog.records if r.getMessage().startswith("sweep finished")]
        assert len(finished) == 1
        assert "runs=2" in finished[0]
        assert "run_p95_ms=" in finished[0]

    def test_empty_sweep(self, manager):
        result = manager.run_sweep(SweepConfig())
        assert result.exit_code == 0
        assert result.message == "empty sweep"
        assert result.rows == []
