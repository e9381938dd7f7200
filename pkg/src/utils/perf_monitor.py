#!/usr/bin/env python3
"""Wall-clock timing of lab commands and sweep blocks.

Durations go to the ``orliczlab.perf`` logger and to the per-sweep timing
line; they never enter reports, which stay reproducible byte for byte.
"""

from __future__ import annotations

import logging
import os
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from threading import Lock
from typing import Deque, Dict, Iterator, Optional

import numpy as np

from .logger import log_structured


@dataclass
class Timings:
    """Running totals for one command or block label."""

    recent: Deque[float]
    count: int = 0
    total: float = 0.0
    slowest: float = 0.0
    not_ok: int = 0
    last_logged: float = 0.0
    lock: Lock = field(default_factory=Lock)

    def add(self, duration: float, exit_code: int) -> None:
        with self.lock:
            self.count += 1
            self.total += duration
            self.slowest = max(self.slowest, duration)
            self.not_ok += exit_code != 0
            self.recent.append(duration)

    def describe(self) -> Dict[str, float]:
        with self.lock:
            recent = np.fromiter(self.recent, dtype=float)
            return {
                "count": self.count,
                "mean_ms": 1000.0 * self.total / self.count if self.count else 0.0,
                "p50_ms": 1000.0 * float(np.percentile(recent, 50)) if recent.size else 0.0,
                "p95_ms": 1000.0 * float(np.percentile(recent, 95)) if recent.size else 0.0,
                "slowest_ms": 1000.0 * self.slowest,
                "not_ok": self.not_ok,
            }


def _env_number(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, str(default)))
    except ValueError:
        return default


class PerfMonitor:
    """Collect command and block timings, keyed by label."""

    # sweeps time blocks under generated names
    MAX_LABELS = 256
    OVERFLOW = "<overflow>"

    def __init__(self) -> None:
        self._window = max(20, int(_env_number("ORLICZLAB_PERF_MAX_SAMPLES", 200)))
        self._log_interval = _env_number("ORLICZLAB_PERF_LOG_INTERVAL", 30.0)
        self._warn_threshold = _env_number("ORLICZLAB_PERF_WARN_THRESHOLD", 10.0)
        self._timings: Dict[str, Timings] = {}
        self._lock = Lock()
        self._logger = logging.getLogger("orliczlab.perf")

    def _timings_for(self, label: str) -> Timings:
        with self._lock:
            timings = self._timings.get(label)
            if timings is None:
                if len(self._timings) >= self.MAX_LABELS:
                    label = self.OVERFLOW
                timings = self._timings.setdefault(label, Timings(recent=deque(maxlen=self._window)))
            return timings

    def _record(self, label: str, duration: float, exit_code: int) -> None:
        timings = self._timings_for(label)
        timings.add(duration, exit_code)
        now = time.time()
        slow = duration >= self._warn_threshold
        if not slow and now - timings.last_logged < self._log_interval:
            return
        timings.last_logged = now
        log_structured(
            self._logger, logging.WARNING if slow else logging.DEBUG, "timing",
            label=label, duration_ms=round(duration * 1000.0, 3), **timings.describe(),
        )

    def record_command(self, name: str, duration: float, *, exit_code: int) -> None:
        self._record(f"command {name}", duration, exit_code)

    @contextmanager
    def time_block(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self._record(f"block {name}", time.perf_counter() - start, 0)

    def summary(self, command: str) -> Optional[Dict[str, float]]:
        """Timings of every run of ``command`` so far, or None before the first."""
        with self._lock:
            timings = self._timings.get(f"command {command}")
        return None if timings is None else timings.describe()

    def labels(self) -> Dict[str, int]:
        """Run count per label."""
        with self._lock:
            items = list(self._timings.items())
        return {label: timings.count for label, timings in items}


perf_monitor = PerfMonitor()

__all__ = ["PerfMonitor", "Timings", "perf_monitor"]
