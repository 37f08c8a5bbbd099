"""Optional process-level parallelism for independent solves."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["thread_cap", "pmap"]

ENV_VAR = "ORLICZ_OT_THREADS"


def thread_cap() -> int:
    """Worker count from ``ORLICZ_OT_THREADS`` (default 1, i.e. sequential)."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return n


def pmap(fn, jobs):
    """``list(map(fn, jobs))``, spread over worker processes when allowed.

    Results come back in job order, so output does not depend on the cap.
    """
    jobs = list(jobs)
    workers = min(thread_cap(), len(jobs))
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))
