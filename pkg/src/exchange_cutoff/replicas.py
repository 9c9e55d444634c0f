"""Replica scheduling and deterministic aggregation."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .rng import seed_stream


@dataclass(frozen=True)
class Statistic:
    name: str
    value: float
    stderr: float = 0.0
    samples: int = 0
    exact: bool = False
    bias_bound: float = 0.0

    @classmethod
    def closed_form(cls, name, value):
        return cls(name=name, value=float(value), stderr=0.0, samples=0, exact=True)

    @classmethod
    def from_samples(cls, name, values, bias_bound=0.0):
        values = np.asarray(values, dtype=float)
        k = len(values)
        if k == 0:
            raise ValueError("no samples")
        se = float(values.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
        return cls(name=name, value=float(values.mean()), stderr=se, samples=k,
                   bias_bound=float(bias_bound))

    def z(self, target, other_stderr=0.0):
        """Standardized gap to ``target`` using the combined standard error."""
        se = math.hypot(self.stderr, other_stderr)
        gap = self.value - target
        if se == 0.0:
            return 0.0 if gap == 0.0 else math.copysign(math.inf, gap)
        return gap / se


def map_replicas(fn, seed, replicas, workers=1, offset=0):
    """Call ``fn(rng, index)`` for each replica and return results in index order.

    Replica ``i`` gets ``seed_stream(seed, offset + i)``. With ``workers > 1``
    replicas run on a thread pool; results do not depend on ``workers``.
    """
    indices = range(offset, offset + int(replicas))

    def task(i):
        return fn(seed_stream(seed, i), i)

    if workers <= 1:
        return [task(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, indices))
