"""Thread-pool plumbing for per-sample work.

ALIGNSCOPE_THREADS caps the worker count; 0 or unset means auto. Results are
always reduced in sorted-id order, so the pool size never changes any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_ENV_VAR = "ALIGNSCOPE_THREADS"
_AUTO_CAP = 8


def worker_count() -> int:
    raw = os.environ.get(_ENV_VAR, "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        return min(os.cpu_count() or 1, _AUTO_CAP)
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to items, preserving input order in the result list."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
