"""Worker-pool helper shared by the per-image pipeline stages."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument wins, then DDT_THREADS, then available parallelism."""
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("DDT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Map a pure function over items, preserving input order.

    Work is farmed out to a thread pool (numpy releases the GIL in the hot
    paths); results always come back in input order, so the output is
    independent of the worker count.
    """
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
