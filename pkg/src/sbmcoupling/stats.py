"""Cycle and bisection statistics of a single graph, plus their model means.

``x_k`` counts k-cycles, ``y_k`` is the largest family of pairwise
edge-disjoint k-cycles and ``z_k`` counts unordered pairs of distinct
k-cycles that share a vertex. They satisfy
``x_k - (2k)^k z_k <= y_k <= x_k``. Only ``y_k`` is 1-Lipschitz under single
edge flips, which is what makes it usable as a transport witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .exceptions import CapExceededError, EnumerationBudgetError
from .graph import Graph
from .models import make_rng

__all__ = [
    "CYCLE_BUDGET",
    "K_CAP",
    "PACKING_EXACT_BUDGET",
    "BISECTION_EXACT_CAP",
    "SK_GROUND_STATE",
    "CycleReport",
    "BisectionReport",
    "count_k_cycles",
    "count_cycles_upto",
    "enumerate_cycles",
    "max_disjoint_packing",
    "count_overlapping_pairs",
    "cycle_report",
    "expected_cycles_uniform",
    "expected_cycles_planted_limit",
    "min_bisection",
    "cut_size",
    "random_bisection_cuts",
]

CYCLE_BUDGET = 1_000_000
K_CAP = 12
PACKING_EXACT_BUDGET = 64
BISECTION_EXACT_CAP = 20
# Sherrington-Kirkpatrick ground state energy, second-order min-bisection constant
SK_GROUND_STATE = 0.7632

EXACT = "exact"
GREEDY = "greedy-lower-bound"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class CycleReport:
    k: int
    x_k: int
    y_k: int
    y_k_exactness: str
    z_k: int

    def as_row(self) -> dict:
        return {"k": self.k, "x_k": self.x_k, "y_k": self.y_k,
                "y_exact": self.y_k_exactness == EXACT, "z_k": self.z_k}


@dataclass(frozen=True)
class BisectionReport:
    value: int
    exactness: str
    partition: np.ndarray


def _check_k(k: int) -> int:
    k = int(k)
    if k < 3:
        raise ValueError(f"cycle length must be at least 3, got {k}")
    if k > K_CAP:
        raise CapExceededError(f"cycle enumeration is capped at k <= {K_CAP}")
    return k


def count_cycles_upto(g: Graph, kmax: int) -> np.ndarray:
    """``out[k]`` is the number of k-cycles for ``3 <= k <= kmax``."""
    kmax = _check_k(kmax)
    indptr, indices = g.csr()
    closings, ok = _kernels.count_cycles_upto(g.n, indptr, indices, kmax, 2 * CYCLE_BUDGET)
    if not ok:
        raise EnumerationBudgetError(f"more than {CYCLE_BUDGET} cycles of length <= {kmax}")
    return closings // 2


def count_k_cycles(g: Graph, k: int) -> int:
    """Number of k-cycles, each counted once regardless of start and direction."""
    return int(count_cycles_upto(g, k)[k])


def enumerate_cycles(g: Graph, k: int) -> np.ndarray:
    """All k-cycles as rows of vertices, starting at the cycle's minimum vertex."""
    count = count_k_cycles(g, k)
    indptr, indices = g.csr()
    return _kernels.list_cycles(g.n, indptr, indices, k, count)


def _cycle_edge_keys(cycles: np.ndarray, n: int) -> np.ndarray:
    nxt = np.roll(cycles, -1, axis=1)
    lo = np.minimum(cycles, nxt)
    hi = np.maximum(cycles, nxt)
    return lo * n + hi


def _conflict_lists(cycles: np.ndarray, n: int) -> list[list[int]]:
    keys = _cycle_edge_keys(cycles, n)
    owners: dict[int, list[int]] = {}
    for c, row in enumerate(keys.tolist()):
        for key in row:
            owners.setdefault(key, []).append(c)
    nbrs = [set() for _ in range(len(cycles))]
    for group in owners.values():
        for a, b in combinations(group, 2):
            nbrs[a].add(b)
            nbrs[b].add(a)
    return [sorted(s) for s in nbrs]


def _components(nbrs: list[list[int]]) -> list[list[int]]:
    seen = [False] * len(nbrs)
    comps = []
    for s in range(len(nbrs)):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in nbrs[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(comp)
    return comps


def _max_independent_set(adj: list[int]) -> int:
    """Size of a maximum independent set; ``adj`` holds neighbour bitmasks."""
    best = 0

    def search(cand: int, size: int) -> None:
        nonlocal best
        while True:
            if cand == 0:
                best = max(best, size)
                return
            if size + cand.bit_count() <= best:
                return
            # a vertex of degree <= 1 within cand belongs to some maximum set
            forced = -1
            pivot, pivot_deg = -1, -1
            rest = cand
            while rest:
                low = rest & -rest
                v = low.bit_length() - 1
                rest ^= low
                d = (adj[v] & cand).bit_count()
                if d <= 1:
                    forced = v
                    break
                if d > pivot_deg:
                    pivot, pivot_deg = v, d
            if forced < 0:
                break
            cand &= ~((1 << forced) | adj[forced])
            size += 1
        search(cand & ~((1 << pivot) | adj[pivot]), size + 1)
        search(cand & ~(1 << pivot), size)

    search((1 << len(adj)) - 1, 0)
    return best


def _greedy_independent_set(nbrs: list[list[int]], comp: list[int], rng) -> int:
    alive = set(comp)
    local = {v: set(nbrs[v]) & alive for v in comp}
    size = 0
    while alive:
        order = rng.permutation(sorted(alive))
        v = min(order.tolist(), key=lambda u: len(local[u] & alive))
        size += 1
        alive.discard(v)
        alive -= local[v]
    return size


def _packing_from_cycles(cycles: np.ndarray, n: int, budget: int, seed) -> tuple[int, str]:
    if len(cycles) == 0:
        return 0, EXACT
    nbrs = _conflict_lists(cycles, n)
    total = 0
    exact = True
    rng = None
    for comp in _components(nbrs):
        if len(comp) == 1:
            total += 1
            continue
        if len(comp) <= budget:
            pos = {v: i for i, v in enumerate(comp)}
            adj = [0] * len(comp)
            for v in comp:
                for w in nbrs[v]:
                    adj[pos[v]] |= 1 << pos[w]
            total += _max_independent_set(adj)
        else:
            if rng is None:
                rng = make_rng(seed)
            total += _greedy_independent_set(nbrs, comp, rng)
            exact = False
    return total, EXACT if exact else GREEDY


def max_disjoint_packing(g: Graph, k: int, budget: int = PACKING_EXACT_BUDGET,
                         seed=0) -> tuple[int, str]:
    """Largest number of pairwise edge-disjoint k-cycles.

    Solved as a maximum independent set in the conflict graph (cycles
    joined when they share an edge), one connected component at a time.
    Components with more than ``budget`` cycles fall back to a seeded
    greedy pass and the result is flagged ``"greedy-lower-bound"``.
    """
    cycles = enumerate_cycles(g, k)
    return _packing_from_cycles(cycles, g.n, budget, seed)


def _overlapping_pairs_from_cycles(cycles: np.ndarray, n: int) -> int:
    if len(cycles) < 2:
        return 0
    rows = np.repeat(np.arange(len(cycles)), cycles.shape[1])
    inc = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cycles.ravel())),
                        shape=(len(cycles), n))
    shared = (inc @ inc.T).tocoo()
    return int(np.count_nonzero(shared.row < shared.col))


def count_overlapping_pairs(g: Graph, k: int) -> int:
    """Unordered pairs of distinct k-cycles with at least one common vertex."""
    return _overlapping_pairs_from_cycles(enumerate_cycles(g, k), g.n)


def cycle_report(g: Graph, k: int, budget: int = PACKING_EXACT_BUDGET, seed=0) -> CycleReport:
    cycles = enumerate_cycles(g, k)
    y, flag = _packing_from_cycles(cycles, g.n, budget, seed)
    return CycleReport(k, len(cycles), y, flag, _overlapping_pairs_from_cycles(cycles, g.n))


def expected_cycles_uniform(n: int, k: int, c: float) -> float:
    """``(n)_k / (2k) * (c/n)^k``, the mean k-cycle count in ``G(n, c/n)``."""
    if k < 3:
        raise ValueError("k must be at least 3")
    if n < k:
        raise ValueError("need n >= k")
    log_ff = math.lgamma(n + 1) - math.lgamma(n - k + 1)
    if c == 0:
        return 0.0
    return math.exp(log_ff + k * math.log(c / n)) / (2 * k)


def expected_cycles_planted_limit(k: int, c: float, delta: float,
                                  flavor: str = "planted-assortative") -> float:
    """Large-n mean k-cycle count of the planted model, ``(c^k + delta^k) / 2k``.

    The two-block kernel has eigenvalues ``c`` and ``+delta`` (assortative)
    or ``-delta`` (disassortative), so the disassortative flavor uses
    ``(-delta)^k``.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if not 0 <= delta <= c:
        raise ValueError("need 0 <= delta <= c")
    second = -delta if "dis" in flavor else delta
    return (c ** k + second ** k) / (2 * k)


def cut_size(g: Graph, partition) -> int:
    side = np.asarray(partition, dtype=np.int64)
    indptr, indices = g.csr()
    return int(_kernels.cut_size(g.n, indptr, indices, side))


def _balanced_random_side(rng, n: int) -> np.ndarray:
    side = np.zeros(n, dtype=np.int64)
    side[rng.permutation(n)[: n // 2]] = 1
    return side


def random_bisection_cuts(g: Graph, count: int, seed) -> np.ndarray:
    rng = make_rng(seed)
    return np.array([cut_size(g, _balanced_random_side(rng, g.n)) for _ in range(count)])


def min_bisection(g: Graph, mode: str = "exact", seed=0, restarts: int = 8,
                  max_passes: int = 50) -> BisectionReport:
    """Fewest edges across a balanced bipartition.

    ``mode="exact"`` enumerates every balanced bipartition (``n <= 20``).
    ``mode="heuristic"`` runs ``restarts`` Fiduccia-Mattheyses descents from
    seeded random balanced starts and reports the best as an upper bound.
    Partitions are 0/1 labels; for odd ``n`` either side may be larger.
    """
    n = g.n
    if mode == EXACT:
        if n > BISECTION_EXACT_CAP:
            raise CapExceededError(f"exact bisection is capped at n <= {BISECTION_EXACT_CAP}")
        if n < 2:
            return BisectionReport(0, EXACT, np.zeros(n, dtype=np.int64))
        value, s = _kernels.exact_bisection(n, g.adjacency_masks())
        part = np.array([(int(s) >> v) & 1 for v in range(n)], dtype=np.int64)
        return BisectionReport(int(value), EXACT, part)
    if mode != HEURISTIC:
        raise ValueError(f"mode must be 'exact' or 'heuristic', got {mode!r}")
    rng = make_rng(seed)
    indptr, indices = g.csr()
    best_val, best_side = None, None
    for _ in range(max(1, restarts)):
        side = _balanced_random_side(rng, n)
        val = int(_kernels.fm_refine(n, indptr, indices, side, max_passes))
        if best_val is None or val < best_val:
            best_val, best_side = val, side.copy()
    return BisectionReport(best_val, HEURISTIC, best_side)
