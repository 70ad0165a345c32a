import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import psutil
from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "CMC_THREADS"


def worker_count() -> int:
    """Number of worker threads: CMC_THREADS if set, otherwise every core"""
    available = psutil.cpu_count(logical=True) or 1
    requested = os.environ.get(THREADS_ENV)
    if not requested:
        return available
    try:
        count = int(requested)
    except ValueError:
        logging.warning(f"Ignoring non-integer {THREADS_ENV}={requested!r}")
        return available
    return max(1, min(count, available))


def parallel_map(func: Callable[[T], R], items: Iterable[T],
                 workers: Optional[int] = None, desc: Optional[str] = None) -> List[R]:
    """Apply func to every item and gather results in input order

    The gather order never depends on completion order, so reductions over
    the returned list stay bit-reproducible for any worker count.
    """
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    show = desc is not None and logging.getLogger().isEnabledFor(logging.INFO)

    if workers == 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, desc=desc, disable=not show, leave=False)]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(tqdm(executor.map(func, items), total=len(items),
                         desc=desc, disable=not show, leave=False))
