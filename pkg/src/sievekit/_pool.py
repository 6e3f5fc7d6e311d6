"""Ordered process-pool map; results never depend on the worker count."""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "SIEVEKIT_WORKERS"


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count: ``SIEVEKIT_WORKERS`` wins over the requested value."""
    env = os.environ.get(WORKERS_ENV)
    value = int(env) if env else (requested or 1)
    if value < 1:
        raise ValueError(f"worker count must be >= 1, got {value}")
    return value


def pmap(func: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> List[R]:
    """``[func(t) for t in tasks]``, optionally spread over processes."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks)), mp_context=ctx) as ex:
        return list(ex.map(func, tasks))
