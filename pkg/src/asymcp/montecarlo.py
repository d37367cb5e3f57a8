"""Seeding and interval helpers shared by the Monte Carlo routines."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

Z95 = 1.959963984540054


def replica_rng(master_seed, *keys: int) -> np.random.Generator:
    """Independent generator for replica ``keys`` of experiment ``master_seed``.

    ``SeedSequence`` hashes the spawn key together with the entropy, which
    gives a splittable, order-independent family of streams.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def mean_interval(values, lo: float = 0.0, hi: float = 1.0, z: float = Z95):
    """Sample mean with a normal-approximation interval clipped to [lo, hi]."""
    v = np.asarray(values, dtype=float)
    m = float(v.mean()) if v.size else float("nan")
    if v.size < 2:
        return m, lo, hi
    half = z * float(v.std(ddof=1)) / math.sqrt(v.size)
    return m, max(lo, m - half), min(hi, m + half)


def map_replicas(fn, n: int, workers: int = 1) -> list:
    """``[fn(i) for i in range(n)]``, optionally on a thread pool.

    The compiled kernels release the GIL, so threads give real parallelism;
    results are returned in replica order whatever the scheduling.
    """
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))
