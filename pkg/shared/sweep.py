"""
Deterministic node sweeps.

Grid-wide sums are split into fixed-size chunks, each chunk is reduced with
math.fsum (correctly rounded) and the partial sums are combined in chunk
order. Chunk boundaries never depend on the worker count, so a sweep returns
the same bits whether it runs on one thread or many.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

logger = logging.getLogger(__name__)

THREADS_ENV = "BGK_THREADS"
CHUNK_SIZE = 8192


def worker_count() -> int:
    """Worker cap from BGK_THREADS (default: all cores)."""
    cores = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return cores
    try:
        value = int(raw)
    except ValueError:
        logger.warning("ignoring %s=%r (not an integer)", THREADS_ENV, raw)
        return cores
    if value < 1:
        logger.warning("ignoring %s=%r (must be >= 1)", THREADS_ENV, raw)
        return cores
    return value


def _chunk_bounds(size: int, chunk_size: int):
    return [(start, min(start + chunk_size, size)) for start in range(0, size, chunk_size)]


def chunk_sum(fn, size: int, chunk_size: int = CHUNK_SIZE):
    """
    Sum of fn(lo, hi) over the fixed chunks [lo, hi) of range(size).

    fn returns the per-node values of its chunk, or a tuple of such arrays; a
    tuple yields a tuple of sums.
    """
    bounds = _chunk_bounds(size, chunk_size) or [(0, 0)]

    def reduce_chunk(bound):
        out = fn(*bound)
        if isinstance(out, tuple):
            return tuple(math.fsum(np.ravel(part)) for part in out)
        return math.fsum(np.ravel(out))

    workers = min(worker_count(), len(bounds)) if len(bounds) > 1 else 1
    if workers <= 1:
        partials = [reduce_chunk(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(reduce_chunk, bounds))
    if isinstance(partials[0], tuple):
        return tuple(math.fsum(column) for column in zip(*partials))
    return math.fsum(partials)


def sweep_sum(fn, arrays, chunk_size: int = CHUNK_SIZE):
    """Sum of fn(*slices) over the flattened, equally sized `arrays`; see chunk_sum."""
    flat = [np.ravel(np.asarray(a, dtype=float)) for a in arrays]
    size = flat[0].size
    if any(a.size != size for a in flat):
        raise ValueError("sweep arrays must have the same number of nodes")
    return chunk_sum(lambda lo, hi: fn(*(a[lo:hi] for a in flat)), size, chunk_size)


def weighted_sum(weights, values, chunk_size: int = CHUNK_SIZE) -> float:
    """sum_i w_i v_i with the deterministic chunk reduction."""
    return sweep_sum(lambda w, v: w * v, [weights, values], chunk_size=chunk_size)
