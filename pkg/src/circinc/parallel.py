"""Block-parallel Monte Carlo driver.

Trials are cut into fixed blocks (``rng.BLOCK``), each with its own substream,
so the merged integer counts are the same for any number of workers.
"""
from __future__ import annotations

import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .rng import blocks, substream


def _pool(workers: int) -> ProcessPoolExecutor:
    # fork lets workers read large inputs the parent prepared; elsewhere fall back
    ctx = multiprocessing.get_context("fork") if sys.platform.startswith("linux") else None
    return ProcessPoolExecutor(max_workers=workers, mp_context=ctx)


def _run_one(fn, seed, args, blk):
    block, size = blk
    return np.asarray(fn(substream(seed, block), size, *args), dtype=np.int64)


def run_blocks(fn, trials: int, seed: int, args: tuple = (), workers: int = 1) -> np.ndarray:
    """Sum ``fn(generator, size, *args)`` (an integer vector) over all blocks.

    ``fn`` must be a module-level function when ``workers > 1``.
    """
    jobs = blocks(trials)
    task = partial(_run_one, fn, seed, args)
    if workers <= 1 or len(jobs) == 1:
        parts = [task(b) for b in jobs]
    else:
        with _pool(workers) as pool:
            parts = list(pool.map(task, jobs))
    return np.sum(parts, axis=0)


def map_ordered(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally in a process pool; order is kept."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with _pool(workers) as pool:
        return list(pool.map(fn, items))
