"""
Worker pool shared by the services.

Results always come back in submission order, so a parallel run produces
exactly what the sequential run produces.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, List, TypeVar

from flowsieve.config import DEFAULT_THREADS

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = DEFAULT_THREADS) -> List[R]:
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Args:
        func: Pure function of one item
        items: Work items
        threads: Worker cap; 1 or less runs inline

    Returns:
        List[R]: One result per item, in input order
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    max_workers = min(threads, len(work))
    results: List[R] = [None] * len(work)  # type: ignore[list-item]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {executor.submit(func, item): i for i, item in enumerate(work)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"Worker failed on item {index}: {str(e)}")
                raise
    return results
