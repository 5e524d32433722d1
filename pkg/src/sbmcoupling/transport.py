"""Optimal transport between two graph models under the edit distance.

On tiny vertex counts both models are exact distributions over isomorphism
classes, so the optimal coupling cost can be computed two ways: as a
transportation problem (primal, solved by a transportation simplex here)
and as the best 1-Lipschitz separating function (dual, an LP over class
values). The two must agree. For large ``n`` only Monte Carlo bounds are
available: a naive upper bound from an explicit coupling and a lower bound
from the mean gap of a 1-Lipschitz statistic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.stats import binom

from .exceptions import MarginalError, SizeMismatchError
from .models import (
    GraphDistribution,
    ModelSpec,
    _bernoulli_positions,
    _triangle_pairs,
    make_rng,
    sample_graph,
)
from .graph import Graph
from .montecarlo import MonteCarloEstimate, map_seeds, spawn_seeds
from .stats import max_disjoint_packing

__all__ = [
    "FEASIBILITY_TOL",
    "DUALITY_TOL",
    "CouplingPlan",
    "DualWitness",
    "transportation_simplex",
    "solve_primal",
    "solve_dual",
    "sample_coupled_pair",
    "expected_baseline_cost",
    "hamming_distance",
    "baseline_coupling_cost",
    "lb_cycle_gap",
    "lb_formula",
    "witness_gap",
]

FEASIBILITY_TOL = 1e-9
DUALITY_TOL = 1e-6


@dataclass(frozen=True)
class CouplingPlan:
    mu: np.ndarray
    cost: float

    def marginal_error(self, p, q) -> float:
        return float(max(np.abs(self.mu.sum(axis=1) - p).max(),
                         np.abs(self.mu.sum(axis=0) - q).max()))


@dataclass(frozen=True)
class DualWitness:
    f: np.ndarray
    objective: float

    def lipschitz_violation(self, d: np.ndarray) -> float:
        gap = np.abs(self.f[:, None] - self.f[None, :]) - d
        return float(max(gap.max(), 0.0))


def _marginals(p, q, d):
    if isinstance(p, GraphDistribution):
        if isinstance(q, GraphDistribution) and [c.index for c in p.classes] != [c.index for c in q.classes]:
            raise SizeMismatchError("distributions are over different class lists")
        p = p.probabilities
    if isinstance(q, GraphDistribution):
        q = q.probabilities
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.asarray(d, dtype=float)
    if p.shape != q.shape or d.shape != (len(p), len(q)):
        raise SizeMismatchError("marginals and cost matrix do not line up")
    for name, v in (("p", p), ("q", q)):
        if (v < 0).any() or abs(v.sum() - 1.0) > FEASIBILITY_TOL:
            raise MarginalError(f"{name} is not a probability vector (sum {v.sum()!r})")
    return p, q, d


def _northwest_corner(a, b):
    # staircase basis with exactly m + n - 1 cells, degenerate zeros included
    m, n = len(a), len(b)
    a = a.copy()
    b = b.copy()
    cells, flows = [], []
    i = j = 0
    while i < m and j < n:
        x = min(a[i], b[j])
        cells.append((i, j))
        flows.append(x)
        a[i] -= x
        b[j] -= x
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return cells, flows


def transportation_simplex(a, b, cost, max_iter: int = 200_000):
    """Minimum-cost transport plan from supplies ``a`` to demands ``b``.

    Network simplex on the bipartite transportation tableau: the basis is a
    spanning tree of row and column nodes, potentials come from the tree,
    the entering cell has the most negative reduced cost and the leaving
    cell is found on the tree cycle it closes. After a run of degenerate
    pivots the entering rule switches to the lowest-index negative cell
    (Bland), which rules out cycling.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = len(a), len(b)
    # absorb rounding so supplies and demands balance exactly
    b = b * (a.sum() / b.sum())
    cells, flows = _northwest_corner(a, b)
    basis = {cell: x for cell, x in zip(cells, flows)}
    adj = [dict() for _ in range(m + n)]  # node -> {neighbour node: cell}
    for i, j in basis:
        adj[i][m + j] = (i, j)
        adj[m + j][i] = (i, j)
    scale = max(1.0, float(np.abs(cost).max()))
    tol = 1e-12 * scale
    degenerate_run = 0
    for _ in range(max_iter):
        pot = np.full(m + n, np.nan)
        pot[0] = 0.0
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for other, (i, j) in adj[node].items():
                if np.isnan(pot[other]):
                    # u_i + v_j = c_ij
                    pot[other] = cost[i, j] - pot[node]
                    queue.append(other)
        u, v = pot[:m], pot[m:]
        reduced = cost - u[:, None] - v[None, :]
        if degenerate_run > 50:
            neg = np.flatnonzero(reduced.ravel() < -tol)
            if neg.size == 0:
                break
            p, q = divmod(int(neg[0]), n)
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
            p, q = divmod(flat, n)
        # tree path from column q back to row p
        start, goal = m + q, p
        parent = {start: None}
        queue = deque([start])
        while goal not in parent:
            node = queue.popleft()
            for other in adj[node]:
                if other not in parent:
                    parent[other] = node
                    queue.append(other)
        path = []
        node = goal
        while parent[node] is not None:
            path.append(adj[node][parent[node]])
            node = parent[node]
        # path runs row p -> column q; walking it from column q the signs
        # alternate starting with a decrease
        path.reverse()
        minus = path[0::2]
        plus = path[1::2]
        leaving = min(minus, key=lambda cell: (basis[cell], cell))
        theta = basis[leaving]
        for cell in minus:
            basis[cell] -= theta
        for cell in plus:
            basis[cell] += theta
        del basis[leaving]
        li, lj = leaving
        del adj[li][m + lj]
        del adj[m + lj][li]
        basis[(p, q)] = theta
        adj[p][m + q] = (p, q)
        adj[m + q][p] = (p, q)
        degenerate_run = degenerate_run + 1 if theta <= 0 else 0
    else:
        raise RuntimeError("transportation simplex did not converge")
    plan = np.zeros((m, n))
    for (i, j), x in basis.items():
        plan[i, j] = max(x, 0.0)
    return plan


def solve_primal(p, q, d) -> CouplingPlan:
    """Cheapest coupling of two class distributions under cost matrix ``d``."""
    p, q, d = _marginals(p, q, d)
    rows = np.flatnonzero(p > 0)
    cols = np.flatnonzero(q > 0)
    sub = transportation_simplex(p[rows], q[cols], d[np.ix_(rows, cols)])
    mu = np.zeros((len(p), len(q)))
    mu[np.ix_(rows, cols)] = sub
    cost = float((mu * d).sum())
    plan = CouplingPlan(mu, cost)
    err = plan.marginal_error(p, q)
    if err > FEASIBILITY_TOL:
        raise MarginalError(f"transport plan misses its marginals by {err:.3g}")
    return plan


def solve_dual(p, q, d) -> DualWitness:
    """Best 1-Lipschitz separating function, ``max_f E_p f - E_q f``.

    Linear program over one value per class with a constraint
    ``f_i - f_j <= d_ij`` for every ordered pair; ``f`` is pinned to 0 on
    the first class since the objective ignores constant shifts.
    """
    p, q, d = _marginals(p, q, d)
    k = len(p)
    if k == 1:
        return DualWitness(np.zeros(1), 0.0)
    ii, jj = np.nonzero(~np.eye(k, dtype=bool))
    rows = np.arange(len(ii))
    a_ub = sp.csr_matrix(
        (np.concatenate([np.ones(len(ii)), -np.ones(len(ii))]),
         (np.concatenate([rows, rows]), np.concatenate([ii, jj]))),
        shape=(len(ii), k),
    )
    b_ub = d[ii, jj]
    span = float(d.max())
    bounds = [(0.0, 0.0)] + [(-span, span)] * (k - 1)
    res = linprog(-(p - q), A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"dual LP failed: {res.message}")
    f = res.x
    return DualWitness(f, float(abs(np.dot(p - q, f))))


def witness_gap(p: GraphDistribution, q: GraphDistribution, values) -> float:
    """``|E_p f - E_q f|`` for per-class witness values."""
    values = np.asarray(values, dtype=float)
    return abs(p.expectation(values) - q.expectation(values))


def _coupled_block(rng, count, pg, ph):
    """Maximal coupling of two Bernoulli fields over ``count`` positions.

    Positions are kept in the union at rate ``max(pg, ph)`` and then split
    by one shared uniform, so each position differs w.p. ``|pg - ph|``.
    """
    top = max(pg, ph)
    pos = _bernoulli_positions(rng, count, top)
    if len(pos) == 0 or top <= 0:
        return pos, pos
    u = rng.random(len(pos)) * top
    return pos[u < pg], pos[u < ph]


def sample_coupled_pair(spec_p: ModelSpec, spec_q: ModelSpec, seed):
    """One draw of the shared-type, per-edge maximal coupling.

    Both graphs see the same vertex blocks (drawn from ``spec_p``); every
    vertex pair is coupled independently. Returns ``(g, h)``.
    """
    if spec_p.n != spec_q.n:
        raise SizeMismatchError("coupled models must share n")
    n = spec_p.n
    rng = make_rng(seed)
    kp, kq = spec_p.kernel(), spec_q.kernel()
    x = rng.random(n)
    blocks = kp.block_of(x)
    prob_p = kp.edge_probabilities(n)
    prob_q = kq.edge_probabilities(n)
    q_blocks = kq.block_of(x)
    members = [np.flatnonzero(blocks == r) for r in range(kp.num_blocks)]
    parts_g, parts_h = [], []
    for r, mr in enumerate(members):
        for s in range(r, len(members)):
            ms = members[s]
            if r == s:
                count = len(mr) * (len(mr) - 1) // 2
            else:
                count = len(mr) * len(ms)
            # q's kernel must be constant on this block pair for a single rate
            qr = np.unique(q_blocks[mr]) if len(mr) else np.array([0])
            qs = np.unique(q_blocks[ms]) if len(ms) else np.array([0])
            if len(qr) > 1 or len(qs) > 1:
                raise ValueError("q's blocks must refine p's blocks")
            gp = float(prob_p[r, s])
            hp = float(prob_q[qr[0], qs[0]])
            tg, th = _coupled_block(rng, count, gp, hp)
            for t, parts in ((tg, parts_g), (th, parts_h)):
                if len(t) == 0:
                    continue
                if r == s:
                    i, j = _triangle_pairs(t)
                    parts.append(np.stack([mr[i], mr[j]], axis=1))
                else:
                    i, j = np.divmod(t, len(ms))
                    parts.append(np.stack([mr[i], ms[j]], axis=1))
    g = Graph(n, np.concatenate(parts_g) if parts_g else np.empty((0, 2), dtype=np.int64))
    h = Graph(n, np.concatenate(parts_h) if parts_h else np.empty((0, 2), dtype=np.int64))
    return g, h


def expected_baseline_cost(spec_p: ModelSpec, spec_q: ModelSpec) -> float:
    """Mean Hamming distance of the per-edge maximal coupling.

    Equals ``E_blocks sum_pairs |p_ij - q_ij|``, which for two-block models
    depends only on the size of the first block, a Binomial(n, 1/2).
    Without clipping every pair contributes ``delta / n`` and the mean is
    ``(n - 1) * delta / 2``.
    """
    if spec_p.n != spec_q.n:
        raise SizeMismatchError("coupled models must share n")
    n = spec_p.n
    pw, pa = min(spec_p.within / n, 1.0), min(spec_p.across / n, 1.0)
    qv = min(spec_q.c / n, 1.0) if not spec_q.planted else None
    if spec_q.planted:
        qw, qa = min(spec_q.within / n, 1.0), min(spec_q.across / n, 1.0)
    else:
        qw = qa = qv
    s = np.arange(n + 1)
    weight = binom.pmf(s, n, 0.5)
    within = s * (s - 1) / 2 + (n - s) * (n - s - 1) / 2
    across = s * (n - s)
    return float(np.sum(weight * (within * abs(pw - qw) + across * abs(pa - qa))))


def hamming_distance(g, h) -> int:
    """``|E(g) ^ E(h)|`` on a shared vertex set; an upper bound on the edit distance."""
    if g.n != h.n:
        raise SizeMismatchError("graphs must share n")
    kg = g.edge_array[:, 0] * g.n + g.edge_array[:, 1]
    kh = h.edge_array[:, 0] * h.n + h.edge_array[:, 1]
    return int(len(np.setxor1d(kg, kh, assume_unique=True)))


def baseline_coupling_cost(spec_p: ModelSpec, spec_q: ModelSpec, samples: int, seed,
                           workers: int = 1) -> MonteCarloEstimate:
    """Monte Carlo mean of ``|E(G) ^ E(H)|`` under the naive coupling.

    The Hamming distance upper-bounds the edit distance of each coupled
    pair, so the mean upper-bounds the optimal transport cost.
    """
    def one(s):
        g, h = sample_coupled_pair(spec_p, spec_q, s)
        return hamming_distance(g, h)

    values = map_seeds(one, spawn_seeds(seed, samples), workers)
    return MonteCarloEstimate.from_samples(values)


def lb_formula(k: int, c: float, delta: float) -> float:
    """Large-n gap ``delta^k / 2k`` of the k-cycle packing witness."""
    if k < 3:
        raise ValueError("k must be at least 3")
    if not 0 <= delta <= c:
        raise ValueError("need 0 <= delta <= c")
    return delta ** k / (2 * k)


def _packing_value(spec: ModelSpec, k: int, seed) -> int:
    g = sample_graph(spec, seed)
    y, _ = max_disjoint_packing(g, k)
    return y


def lb_cycle_gap(spec_p: ModelSpec, spec_q: ModelSpec, k: int, samples: int, seed,
                 workers: int = 1) -> MonteCarloEstimate:
    """Estimate ``|E_P y_k - E_Q y_k|`` from independent samples of each model.

    By weak duality the estimate minus two standard errors is a lower
    bound, at roughly 97.5% confidence, on the optimal coupling cost.
    """
    if spec_p.n != spec_q.n:
        raise SizeMismatchError("models must share n")
    if samples < 100:
        raise ValueError("lb_cycle_gap needs at least 100 samples per model")
    seeds_p, seeds_q = spawn_seeds(seed, 2)
    yp = np.asarray(map_seeds(lambda s: _packing_value(spec_p, k, s), spawn_seeds(seeds_p, samples), workers), dtype=float)
    yq = np.asarray(map_seeds(lambda s: _packing_value(spec_q, k, s), spawn_seeds(seeds_q, samples), workers), dtype=float)
    diff = float(yp.mean() - yq.mean())
    se = math.sqrt(yp.var(ddof=1) / len(yp) + yq.var(ddof=1) / len(yq))
    return MonteCarloEstimate(abs(diff), se, samples, signed=diff)
