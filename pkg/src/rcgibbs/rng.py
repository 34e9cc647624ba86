"""Counter-based splittable random streams and deterministic task fan-out.

A master seed fans out to per-task Philox streams keyed by (seed, task
index), so results are independent of thread count and scheduling order.
Merged outputs are always collected in task-index order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the task identified by (master_seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def run_tasks(fn, args_list, threads: int = 1):
    """Run fn over args_list, returning results in input order.

    Each args entry is passed as a single positional argument. With
    threads == 1 the tasks run inline; otherwise a thread pool is used.
    Output order (and therefore any downstream reduction) never depends
    on the thread count.
    """
    if threads <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, args_list))
