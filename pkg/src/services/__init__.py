"""
🏗️ Service Layer - Base Service Interface
==========================================

Services sit between the command line and the core modules: they turn a
validated RunConfig into core calls and package the outcome as a
ServiceResult. Services never raise; every failure becomes a result with
an error code, the offending parameter and the process exit code.
"""

import logging
from abc import ABC
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from ..constants import EXIT_INPUT_ERROR, EXIT_NUMERICAL_ERROR, EXIT_OK, EXIT_VERDICT_FAILURE
from ..core.errors import OrliczLabError
from ..utils.validation import ValidationError


@dataclass
class ServiceResult:
    """Standardized result object for service operations.

    ``success`` means the computation ran; a failed check is still a
    successful computation with ``exit_code`` 2.
    """
    success: bool
    data: Optional[Any] = None
    message: Optional[str] = None
    error_code: Optional[str] = None
    exit_code: int = EXIT_OK
    param: Optional[str] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def status(self) -> str:
        if not self.success:
            return "error"
        return "ok" if self.exit_code == EXIT_OK else "check-failed"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for reports."""
        result: Dict[str, Any] = {
            "success": self.success,
            "status": self.status,
            "exit_code": self.exit_code,
        }

        if self.data is not None:
            result["data"] = self.data
        if self.message:
            result["message"] = self.message
        if self.error_code:
            result["error_code"] = self.error_code
        if self.param:
            result["param"] = self.param

        return result


def pydantic_error_param(error: PydanticValidationError) -> str:
    """Dotted location of the first pydantic error, or "config"."""
    errors = error.errors()
    if not errors or not errors[0].get("loc"):
        return "config"
    return ".".join(str(part) for part in errors[0]["loc"])


class BaseService(ABC):
    """Base class for all services with common functionality."""

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"orliczlab.service.{name}")
        self.commands: Dict[str, Callable[..., ServiceResult]] = {}

    def execute(self, action: str, *args: Any, **kwargs: Any) -> ServiceResult:
        """Run one registered action and map errors onto exit codes."""
        handler = self.commands.get(action)
        if handler is None:
            return self._error_result(
                f"unknown action '{self.name}.{action}'", "UNKNOWN_COMMAND", EXIT_INPUT_ERROR, "command"
            )
        try:
            return handler(*args, **kwargs)
        except OrliczLabError as e:
            level = logging.ERROR if e.exit_code == EXIT_NUMERICAL_ERROR else logging.WARNING
            self.logger.log(level, f"{self.name}.{action} failed: {e}")
            return self._error_result(e.message, e.error_code, e.exit_code, e.param, data=dict(e.context) or None)
        except ValidationError as e:
            self.logger.warning(f"{self.name}.{action} rejected input: {e}")
            return self._error_result(e.message, e.error_code, e.exit_code, e.field_name)
        except PydanticValidationError as e:
            param = pydantic_error_param(e)
            return self._error_result(e.errors()[0]["msg"], "INVALID_CONFIG", EXIT_INPUT_ERROR, param)
        except Exception as e:
            return self._handle_error(e, action)

    def _handle_error(self, error: Exception, operation: str) -> ServiceResult:
        """Standard handling for unexpected errors: numerical failure, exit 4."""
        error_msg = f"Error in {self.name}.{operation}: {str(error)}"
        self.logger.error(error_msg, exc_info=True)

        return ServiceResult(
            success=False,
            message=error_msg,
            error_code="OPERATION_FAILED",
            exit_code=EXIT_NUMERICAL_ERROR,
            param=operation,
        )

    def _success_result(
        self,
        data: Any = None,
        message: Optional[str] = None,
        rows: Optional[List[Dict[str, Any]]] = None,
        summary: Optional[Dict[str, Any]] = None,
        check_passed: bool = True,
    ) -> ServiceResult:
        """Helper to create results of computations that ran.

        ``check_passed=False`` marks a failed check (exit 2).
        """
        return ServiceResult(
            success=True,
            data=data,
            message=message,
            exit_code=EXIT_OK if check_passed else EXIT_VERDICT_FAILURE,
            rows=list(rows or []),
            summary=dict(summary or {}),
        )

    def _error_result(
        self,
        message: str,
        error_code: str = "ERROR",
        exit_code: int = EXIT_INPUT_ERROR,
        param: Optional[str] = None,
        data: Any = None,
    ) -> ServiceResult:
        """Helper to create error results."""
        return ServiceResult(
            success=False,
            data=data,
            message=message,
            error_code=error_code,
            exit_code=exit_code,
            param=param,
        )
