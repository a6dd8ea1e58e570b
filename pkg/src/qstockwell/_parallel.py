"""Worker pool for independent slices, plus a vectorized compensated sum."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def worker_count(default: int = 1) -> int:
    """Worker count from ``QSW_THREADS``, falling back to ``default``."""
    raw = os.environ.get("QSW_THREADS")
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QSW_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"QSW_THREADS must be a positive integer, got {raw!r}")
    return n


@contextmanager
def single_threaded_blas():
    """Pin BLAS to one thread so matrix products do not depend on the pool size."""
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - optional at runtime
        yield
        return
    with threadpool_limits(limits=1, user_api="blas"):
        yield


def map_ordered(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly on a thread pool; results keep item order."""
    items = list(items)
    n = worker_count() if workers is None else workers
    with single_threaded_blas():
        if n <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=n) as pool:
            return list(pool.map(fn, items))


def compensated_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Neumaier summation along ``axis``, vectorized over the remaining axes.

    Terms are added in index order, so the result does not depend on how
    the array was produced.
    """
    a = np.moveaxis(np.asarray(values, float), axis, 0)
    total = np.zeros(a.shape[1:])
    comp = np.zeros(a.shape[1:])
    for term in a:
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + comp
