"""Order-preserving data-parallel helpers.

All lattice sums and Gram assemblies in the package go through ordered_map so
that results are combined in input order, whatever the worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import psutil

from twistframe import config

T = TypeVar("T")
R = TypeVar("R")


def worker_count(threads: Optional[int] = None) -> int:
    """Resolve the worker count: argument, TWISTFRAME_THREADS, configuration, physical cores."""
    if threads is not None and threads > 0:
        return threads

    env = os.environ.get("TWISTFRAME_THREADS")
    if env:
        return max(1, int(env))

    configured = config.getint("twistframe", "threads", section="runtime", fallback=0)
    if configured > 0:
        return configured

    return psutil.cpu_count(logical=False) or 1


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    items = list(items)
    workers = min(worker_count(threads), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
