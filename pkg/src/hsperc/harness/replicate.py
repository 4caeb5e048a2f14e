"""Fan replicas out over a thread pool; results come back in replica order."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

from ..sampling import RngStream

T = TypeVar("T")

# stream ids are replica * N_ROLES + role, so each role of an experiment
# (coupled sampler, first oracle, second oracle, ...) has its own streams
N_ROLES = 16


def stream(seed: int, role: int, replica: int = 0) -> RngStream:
    if not 0 <= role < N_ROLES:
        raise ValueError("role out of range")
    return RngStream(seed, replica * N_ROLES + role)


def map_replicas(fn: Callable[[int], T], n: int, threads: int = 1) -> list[T]:
    """``[fn(0), ..., fn(n-1)]``, evaluated on up to ``threads`` threads.

    Each call must draw only from its own stream, which makes the result
    independent of the thread count.
    """
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))
