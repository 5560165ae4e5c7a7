"""Order-preserving parallel map capped by the ``GICB_THREADS`` environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(threads: int = None) -> int:
    if threads is None:
        try:
            threads = int(os.environ.get("GICB_THREADS", "1"))
        except ValueError:
            threads = 1
    return max(1, threads)


def pmap(fn, items, threads: int = None) -> list:
    """``[fn(x) for x in items]``, evaluated on up to ``threads`` workers; result order is input order."""
    items = list(items)
    n = min(thread_count(threads), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
