"""Counter-based per-replication random streams and deterministic reductions.

Each replication (or chunk of replications) gets its own Philox stream at
counter block ``index << 128`` under the run seed, so results do not depend
on execution order and replications can run in parallel.  Reductions use
math.fsum, which is exactly rounded and therefore schedule-independent.
"""

from __future__ import annotations

import math

import numpy as np

_KEY_MASK = (1 << 128) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for replication/chunk `index` under `seed`."""
    return np.random.Generator(
        np.random.Philox(key=int(seed) & _KEY_MASK, counter=int(index) << 128))


def mean_and_se(values) -> tuple[float, float]:
    """Exact-sum mean and standard error of a 1-d sample."""
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if n == 0:
        return float("nan"), float("nan")
    mean = math.fsum(arr) / n
    if n == 1:
        return mean, float("nan")
    var = math.fsum((arr - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)
