"""Deterministic chunked parallelism.

Scans over centers are embarrassingly parallel; results must be
bit-identical whatever the thread count. Workers therefore receive index
ranges, chunk results are collected in index order, and callers combine
them only with exactly associative operations (elementwise max, ordered
concatenation).
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def run_chunked(worker, n_items: int, threads: int) -> list:
    """Call worker(start, stop) over a partition of range(n_items).

    Returns the chunk results in index order. threads <= 1 runs inline.
    """
    if n_items <= 0:
        return []
    if threads <= 1 or n_items == 1:
        return [worker(0, n_items)]
    k = min(int(threads), n_items)
    bounds = np.linspace(0, n_items, k + 1).astype(int)
    with ThreadPoolExecutor(max_workers=k) as ex:
        futures = [
            ex.submit(worker, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        return [f.result() for f in futures]


def max_merge(chunks: list) -> np.ndarray:
    """Elementwise maximum across chunk arrays (exact, order-free)."""
    out = chunks[0]
    for c in chunks[1:]:
        out = np.maximum(out, c)
    return out
