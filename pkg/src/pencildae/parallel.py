"""Deterministic thread-pool map capped by ``PENCILDAE_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get("PENCILDAE_THREADS", "1")))
    except ValueError:
        return 1


def pmap(func, items):
    """``[func(x) for x in items]``, possibly threaded; result order is input order."""
    items = list(items)
    k = max_threads()
    if k == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(k, len(items))) as ex:
        return list(ex.map(func, items))
