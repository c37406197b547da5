"""Trial-level parallelism.

Trials are independent tasks keyed by their index; results come back in
index order whatever the worker count.  The numba kernels release the GIL,
so a thread pool is enough.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested=None):
    cap = os.environ.get("HOLE_LAB_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, int(n))


def map_ordered(func, items, workers=None):
    items = list(items)
    w = worker_count(workers)
    if w == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(func, items))
