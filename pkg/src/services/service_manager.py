"""
🔧 Service Manager - Central Service Coordination
===============================================

Routes dotted commands (``group.action``) to their services, times every
run and executes sweeps.
"""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

import pandas as pd

from . import BaseService, ServiceResult
from .cesaro_service import CesaroService
from .counterexample_service import CounterexampleService
from .dh_service import DHService
from .function_service import FunctionService
from .orlicz_service import OrliczService
from ..config_schema import RunConfig, SweepConfig
from ..constants import EXIT_INPUT_ERROR, EXIT_OK, EXIT_VERDICT_FAILURE
from ..utils.logger import log_structured
from ..utils.perf_monitor import perf_monitor


class ServiceManager:
    """Central manager for all command services."""

    def __init__(self):
        self.logger = logging.getLogger("orliczlab.service_manager")

        self.orlicz = OrliczService()
        self.fn = FunctionService()
        self.cesaro = CesaroService()
        self.counterexample = CounterexampleService()
        self.dh = DHService()

        # Service registry, keyed by command group
        self.services: Dict[str, BaseService] = {
            "orlicz": self.orlicz,
            "fn": self.fn,
            "cesaro": self.cesaro,
            "counterexample": self.counterexample,
            "dh": self.dh,
        }

    def get_service(self, name: str) -> Optional[BaseService]:
        """Get a specific service by group name."""
        return self.services.get(name)

    def run(self, config: RunConfig) -> ServiceResult:
        """Execute one validated run."""
        group, _, action = config.command.partition(".")
        service = self.get_service(group)
        start = time.perf_counter()
        if service is None:
            result = ServiceResult(
                success=False,
                message=f"unknown command group '{group}'",
                error_code="UNKNOWN_COMMAND",
                exit_code=EXIT_INPUT_ERROR,
                param="command",
            )
        else:
            result = service.execute(action, config)
        duration = time.perf_counter() - start
        perf_monitor.record_command(config.command, duration, exit_code=result.exit_code)
        log_structured(
            self.logger, logging.INFO, "command finished",
            command=config.command, status=result.status, exit_code=result.exit_code,
            duration_ms=round(duration * 1000, 3),
        )
        return result

    def run_sweep(self, sweep: SweepConfig, workers: int = 1) -> ServiceResult:
        """Run every config and aggregate one row per config, in config order.

        Rows carry the parameters that vary across the sweep, the exit code,
        the one-line message and the flat summary of each run.
        """
        configs = sweep.configs
        if not configs:
            return ServiceResult(success=True, data={"runs": 0}, message="empty sweep", exit_code=EXIT_OK)

        with perf_monitor.time_block(f"sweep.{sweep.command}"):
            with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
                results = list(pool.map(self.run, configs))

        varied = _varied_parameters(configs)
        rows: List[Dict[str, Any]] = []
        for index, (row_params, result) in enumerate(zip(varied, results)):
            row: Dict[str, Any] = {"index": index, **row_params}
            row["status"] = result.status
            row["exit_code"] = result.exit_code
            row["message"] = result.message
            if not result.success:
                row["error_code"] = result.error_code
                row["param"] = result.param
            row.update({f"summary.{k}": v for k, v in result.summary.items()})
            rows.append(row)

        failures = sum(1 for r in results if r.exit_code != EXIT_OK)
        timing = perf_monitor.summary(sweep.command) or {}
        log_structured(
            self.logger, logging.INFO, "sweep finished",
            command=sweep.command, runs=len(results), failures=failures,
            **{f"run_{key}": value for key, value in timing.items()},
        )
        return ServiceResult(
            success=True,
            data={"runs": len(results), "failures": failures},
            message=f"{len(results)} runs of {sweep.command}, {failures} not ok",
            exit_code=EXIT_OK if failures == 0 else EXIT_VERDICT_FAILURE,
            rows=rows,
            summary={"runs": len(results), "failures": failures},
        )


def _varied_parameters(configs: List[RunConfig]) -> List[Dict[str, Any]]:
    """Flattened config fields whose value differs between configs."""
    flat = pd.json_normalize([c.canonical() for c in configs])
    keys = flat.apply(
        lambda column: column.map(lambda v: json.dumps(v, sort_keys=True, default=str))
    )
    varied = [name for name in flat.columns if keys[name].nunique(dropna=False) > 1]
    return [
        {name: (json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v) for name, v in record.items()}
        for record in flat[varied].to_dict(orient="records")
    ]


# Global service manager instance
_service_manager = None


def get_service_manager() -> ServiceManager:
    """Get the global service manager instance."""
    global _service_manager
    if _service_manager is None:
        _service_manager = ServiceManager()
    return _service_manager
