"""
Thread fan-out for embarrassingly parallel work.

Results come back in chunk order, so pooled statistics do not depend on the
number of workers.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: int) -> int:
    """0 means one worker per available CPU."""
    if threads < 0:
        raise ValueError("threads must be non-negative")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def split_range(n: int, parts: int) -> List[Tuple[int, int]]:
    """Splits range(n) into at most `parts` contiguous, non-empty (lo, hi) pieces."""
    parts = max(1, min(parts, n))
    bounds = [round(k * n / parts) for k in range(parts + 1)]
    return [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_chunks(fn: Callable[[T], R], chunks: Sequence[T], threads: int = 1) -> List[R]:
    workers = min(resolve_threads(threads), max(1, len(chunks)))
    if workers == 1:
        return [fn(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))
