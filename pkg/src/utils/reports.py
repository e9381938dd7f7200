#!/usr/bin/env python3
"""
📄 Report writer for OrliczLab runs

Canonical JSON (sorted keys, 2-space indent, no timestamps) plus a CSV
projection of the record rows. Identical configs give identical bytes:
nothing run-dependent (time, host, paths) is written.
"""

import json
import logging
import math
import os
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..version import get_tool_info

logger = logging.getLogger("orliczlab.reports")


def to_jsonable(value: Any) -> Any:
    """Convert report content to JSON-safe values.

    Infinite floats become "inf"/"-inf", NaN becomes "nan" and rationals
    become "p/q" strings.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return to_jsonable(value.value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    return value


def build_report(
    command: str,
    config: Dict[str, Any],
    config_digest: str,
    status: str,
    summary: str,
    result: Any,
) -> Dict[str, Any]:
    return {
        "tool": get_tool_info(),
        "config_hash": config_digest,
        "command": command,
        "config": config,
        "status": status,
        "summary": summary,
        "result": result,
    }


def render_json(report: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def render_csv(rows: List[Dict[str, Any]]) -> str:
    """One line per record; nested values are written as canonical JSON."""
    flat = [
        {
            key: json.dumps(value, sort_keys=True) if isinstance(value, (list, dict)) else value
            for key, value in to_jsonable(row).items()
        }
        for row in rows
    ]
    return pd.DataFrame(flat).to_csv(index=False, lineterminator="\n")


def default_report_path(output_dir: str, command: str, config_digest: str, fmt: str) -> Path:
    return Path(output_dir) / f"{command}-{config_digest[:12]}.{fmt}"


def atomic_write(path: Path, text: str) -> None:
    """Write via a sibling temp file, fsync, then os.replace().

    Raises:
        OSError: if the directory cannot be created or the write fails
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_file = path.with_name(path.name + ".tmp")
    try:
        with open(tmp_file, "w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_file, path)
    except OSError:
        try:
            if tmp_file.exists():
                tmp_file.unlink()
        except OSError:
            pass
        raise


def write_report(
    report: Dict[str, Any],
    rows: List[Dict[str, Any]],
    fmt: str,
    path: Path,
) -> Path:
    """Write the JSON report or its CSV projection and return the path."""
    if fmt == "csv":
        text = render_csv(rows if rows else [_summary_row(report)])
    else:
        text = render_json(report)
    atomic_write(path, text)
    logger.debug(f"report written: {path}")
    return path


def _summary_row(report: Dict[str, Any]) -> Dict[str, Any]:
    row: Dict[str, Any] = {"command": report["command"], "status": report["status"], "summary": report["summary"]}
    result: Optional[Any] = report.get("result")
    if isinstance(result, dict):
        for key in ("error_code", "param", "exit_code"):
            if key in result:
                row[key] = result[key]
    return row
