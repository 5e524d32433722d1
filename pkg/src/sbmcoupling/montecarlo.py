"""Seed streams and small helpers shared by the Monte Carlo drivers."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

__all__ = ["MonteCarloEstimate", "spawn_seeds", "map_seeds", "default_workers"]


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    se: float
    samples: int
    signed: float | None = None

    @classmethod
    def from_samples(cls, values) -> "MonteCarloEstimate":
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("nan")
        return cls(float(v.mean()), se, len(v))

    def lower_bound(self, z: float = 2.0) -> float:
        return self.mean - z * self.se

    def within(self, target: float, n_se: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.mean - target) <= n_se * self.se + slack


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn_seeds(seed, count: int) -> list[np.random.SeedSequence]:
    """``count`` independent child streams of ``seed``.

    Children are addressed by index, so worker ``i`` gets the same stream no
    matter how many workers run or in which order they finish.
    """
    parent = _as_seed_sequence(seed)
    return [
        np.random.SeedSequence(parent.entropy, spawn_key=parent.spawn_key + (i,))
        for i in range(int(count))
    ]


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def map_seeds(fn, seeds, workers: int = 1) -> list:
    """``[fn(s) for s in seeds]``, optionally across processes; order preserved."""
    if workers is None or workers <= 1 or len(seeds) < 2:
        return [fn(s) for s in seeds]
    seeds = list(seeds)
    # one contiguous chunk per task keeps pickling and dispatch overhead low
    size = -(-len(seeds) // (4 * workers))
    chunks = [seeds[i:i + size] for i in range(0, len(seeds), size)]
    parts = Parallel(n_jobs=workers)(delayed(_run_chunk)(fn, c) for c in chunks)
    return [x for part in parts for x in part]


def _run_chunk(fn, seeds):
    return [fn(s) for s in seeds]
