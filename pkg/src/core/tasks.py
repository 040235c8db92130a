"""Thread-pool fan-out for sweeps over independent grid points."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Hashable, Iterable
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

from src.config import settings

logger = logging.getLogger(__name__)


class JobStatus(StrEnum):
    SUCCESS = "success"
    FAILED = "failed"


@dataclass(frozen=True)
class PointResult:
    key: Any
    status: JobStatus
    value: Any = None
    error: str = ""


def _run_point(fn: Callable[[Any], Any], key: Any) -> PointResult:
    """Evaluate one point; failures are recorded, never raised."""
    try:
        return PointResult(key=key, status=JobStatus.SUCCESS, value=fn(key))
    except Exception as exc:  # noqa: BLE001
        logger.warning("point %s failed: %s", key, exc)
        return PointResult(key=key, status=JobStatus.FAILED, error=f"{type(exc).__name__}: {exc}")


def fan_out(
    fn: Callable[[Any], Any], keys: Iterable[Hashable], threads: int | None = None
) -> list[PointResult]:
    """Run fn over keys on a thread pool; results come back in the order of keys."""
    keys = list(keys)
    workers = max(1, threads or settings.SWEEP_THREADS)
    started = time.perf_counter()
    out: dict[int, PointResult] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_map = {executor.submit(_run_point, fn, key): i for i, key in enumerate(keys)}
        for future in as_completed(future_map):
            out[future_map[future]] = future.result()
    logger.debug(
        "evaluated %s points on %s threads in %.2fs",
        len(keys),
        workers,
        time.perf_counter() - started,
    )
    return [out[i] for i in sorted(out)]
