#!/usr/bin/env python3
"""
🔍 Centralized Logging System for OrliczLab
Console logs go to stderr so stdout stays free for run summaries.
Optional rotating file logs and structured JSON logging for batch runs.
Log output never enters report files.
"""

import json
import logging
import logging.handlers
import os
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

ROOT_LOGGER_NAME = "orliczlab"

# JSON logging for sweeps and CI log aggregation
ENABLE_JSON_LOGS = os.getenv('ORLICZLAB_JSON_LOGS', '0') == '1'
PLAIN_LOGS = os.getenv('ORLICZLAB_PLAIN_LOGS', '0') == '1' or not sys.stderr.isatty()

LOG_LEVEL = logging.WARNING
MAX_LOG_SIZE = 10 * 1024 * 1024
BACKUP_COUNT = 3
ENABLE_SYSTEM_INFO = os.getenv('ORLICZLAB_SYSTEM_INFO') == '1'


def _get_log_dir() -> Optional[Path]:
    """File logging is opt-in: a log directory or the force flag enables it."""
    env_dir = os.getenv('ORLICZLAB_LOG_DIR')
    if env_dir:
        return Path(env_dir)
    if os.getenv('ORLICZLAB_FORCE_FILE_LOG') == '1':
        return Path.home() / ".orliczlab" / "logs"
    return None


LOG_DIR = _get_log_dir()
ENABLE_FILE_LOGGING = LOG_DIR is not None

_env_level = os.getenv('ORLICZLAB_LOG_LEVEL')
if _env_level:
    try:
        LOG_LEVEL = getattr(logging, _env_level.upper())
    except AttributeError:
        pass  # Ignore invalid level

if ENABLE_FILE_LOGGING:
    try:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
    except OSError:
        ENABLE_FILE_LOGGING = False

_RESERVED = frozenset((
    'name', 'msg', 'args', 'created', 'filename', 'funcName',
    'levelname', 'levelno', 'lineno', 'module', 'msecs',
    'message', 'pathname', 'process', 'processName', 'relativeCreated',
    'thread', 'threadName', 'exc_info', 'exc_text', 'stack_info',
    'taskName', 'no_color',
))


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for interactive console output."""

    COLORS = {
        'DEBUG': '\033[36m',     # Cyan
        'INFO': '\033[32m',      # Green
        'WARNING': '\033[33m',   # Yellow
        'ERROR': '\033[31m',     # Red
        'CRITICAL': '\033[35m',  # Magenta
        'RESET': '\033[0m'       # Reset
    }

    def format(self, record: logging.LogRecord) -> str:
        if getattr(record, 'no_color', False):
            return super().format(record)
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        # format a copy so other handlers see the plain level name
        record = logging.makeLogRecord(record.__dict__)
        record.levelname = f"{color}{record.levelname}{self.COLORS['RESET']}"
        return super().format(record)


class JSONFormatter(logging.Formatter):
    """Structured JSON formatter, one object per line.

    Example output:
        {"level": "WARNING", "logger": "orliczlab.counterexample",
         "message": "counterexample search exhausted", "n": 2,
         "timestamp": "2026-10-18T10:30:00.123000Z", ...}
    """

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            'timestamp': datetime.fromtimestamp(record.created, tz=timezone.utc)
            .isoformat().replace('+00:00', 'Z'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }

        if record.levelno >= logging.WARNING:
            log_data['source'] = f"{record.filename}:{record.lineno}"
            log_data['function'] = record.funcName

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        for key, value in record.__dict__.items():
            if key in _RESERVED:
                continue
            try:
                json.dumps(value)
                log_data[key] = value
            except (TypeError, ValueError):
                log_data[key] = str(value)

        try:
            return json.dumps(log_data, ensure_ascii=True, sort_keys=True)
        except (TypeError, ValueError) as e:
            safe_data = {k: str(v) for k, v in log_data.items()}
            safe_data['_json_error'] = str(e)
            return json.dumps(safe_data, ensure_ascii=True, sort_keys=True)


_PLAIN_FORMAT = '%(asctime)s | %(name)s | %(levelname)s | %(message)s'


def setup_logger(name: str = ROOT_LOGGER_NAME, level: Optional[str] = None) -> logging.Logger:
    """
    Sets up a logger with a stderr console handler and optional file handler.

    Core modules log under ``orliczlab.<module>`` and propagate here, so
    configuring the root ``orliczlab`` logger once is enough.

    Args:
        name: Logger name
        level: Optional level name overriding ORLICZLAB_LOG_LEVEL

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if level:
        resolved = getattr(logging, level.upper(), None)
        if isinstance(resolved, int):
            logger.setLevel(resolved)
            for handler in logger.handlers:
                handler.setLevel(resolved)

    # Prevent duplicate handlers if logger already exists
    if logger.handlers:
        return logger

    effective = logger.level or LOG_LEVEL
    logger.setLevel(effective)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(effective)
    if ENABLE_JSON_LOGS:
        console_formatter: logging.Formatter = JSONFormatter()
    elif PLAIN_LOGS:
        console_formatter = logging.Formatter(_PLAIN_FORMAT)
    else:
        console_formatter = ColoredFormatter('%(levelname)s | %(name)s | %(message)s')
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    if ENABLE_FILE_LOGGING:
        try:
            file_handler = logging.handlers.RotatingFileHandler(
                LOG_DIR / "orliczlab.log",
                maxBytes=MAX_LOG_SIZE,
                backupCount=BACKUP_COUNT,
                encoding='utf-8'
            )
            file_handler.setLevel(effective)
            file_handler.setFormatter(JSONFormatter() if ENABLE_JSON_LOGS else logging.Formatter(
                '%(asctime)s | %(name)s | %(levelname)s | %(filename)s:%(lineno)d | %(message)s'
            ))
            logger.addHandler(file_handler)
        except OSError:
            pass

    return logger


def log_startup(module_name: str) -> None:
    """Log startup information; system details only with ORLICZLAB_SYSTEM_INFO=1."""
    from ..version import get_app_info

    logger = logging.getLogger(module_name)
    logger.info(f"🧮 Starting {get_app_info()}")

    if not ENABLE_SYSTEM_INFO:
        return
    try:
        import numpy
        import psutil
        import scipy

        memory = psutil.virtual_memory()
        logger.info(f"🖥️  Platform: {platform.platform()}")
        logger.info(f"🐍 Python: {platform.python_version()} | numpy {numpy.__version__} | scipy {scipy.__version__}")
        logger.info(f"💾 Memory: {memory.available / (1024**3):.1f}GB available")
        logger.info(f"⚙️  CPUs: {psutil.cpu_count(logical=True)}")
        if ENABLE_FILE_LOGGING:
            logger.info(f"📂 Log Directory: {LOG_DIR}")
    except ImportError:
        logger.warning("psutil not available - skipping system info")
    except Exception as e:
        logger.warning(f"Could not gather system info: {e}")


def log_exception(logger: logging.Logger, exc_info: bool = True) -> None:
    logger.exception("❌ Unhandled exception occurred:", exc_info=exc_info)


def log_structured(logger: logging.Logger, level: int, message: str, **context: Any) -> None:
    """Log a message with structured context fields.

    In JSON mode context fields appear as separate JSON keys. Otherwise
    they're appended to the message as key=value pairs.

    Example:
        >>> log_structured(logger, logging.INFO, "certificate built",
        ...                phi="linear", n_max=200, d_upper=0.35)
    """
    if not logger.isEnabledFor(level):
        return
    if ENABLE_JSON_LOGS:
        logger.log(level, message, extra={k: v for k, v in context.items() if k not in _RESERVED})
    elif context:
        context_str = " ".join(f"{k}={v}" for k, v in context.items())
        logger.log(level, f"{message} | {context_str}")
    else:
        logger.log(level, message)
