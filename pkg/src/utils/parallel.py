"""
Thread-pool helpers with deterministic results.

``ordered_map`` returns results in input order whatever the thread count, and
``stable_sum`` is exactly rounded, so a reduction over those results gives the
same bits for --threads 1 and --threads N.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply ``func`` to every item, results in input order"""
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def stable_sum(values: Iterable[float]) -> float:
    """Correctly rounded sum; independent of summation order"""
    return math.fsum(values)
