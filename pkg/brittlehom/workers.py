"""Worker-count configuration and an order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from .errors import ConfigError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HOMOG_THREADS"


def worker_count() -> int:
    """Worker cap from HOMOG_THREADS (0 or unset means all cores)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if value < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """
    Apply fn to every item, possibly concurrently.

    Results come back in input order, so any reduction over them is
    independent of the schedule.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
