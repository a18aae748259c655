"""Fixed-plan chunked execution; results do not depend on the worker count."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def default_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_chunks(fn, tasks, threads=1):
    """Map a picklable fn over tasks, preserving order."""
    tasks = list(tasks)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as ex:
        return list(ex.map(fn, tasks))
