"""Slow, independent reference implementations used only by the tests.

Everything here is plain Python over itertools so that it shares no code
path with the package internals it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def edges_of(g):
    return {tuple(e) for e in g.edge_array.tolist()}


def brute_edit_distance(n, e1, e2):
    e1 = {tuple(sorted(e)) for e in e1}
    e2 = {tuple(sorted(e)) for e in e2}
    best = None
    for perm in itertools.permutations(range(n)):
        moved = {tuple(sorted((perm[i], perm[j]))) for i, j in e1}
        d = len(moved ^ e2)
        best = d if best is None else min(best, d)
    return best


def all_labelled_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield {pairs[t] for t in range(len(pairs)) if mask >> t & 1}


def brute_canonical(n, edges):
    """Lexicographically smallest sorted edge tuple over all relabellings."""
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[i], perm[j]))) for i, j in edges))
        key = (len(key), key)
        if best is None or key < best:
            best = key
    return best


def brute_class_count(n):
    return len({brute_canonical(n, e) for e in all_labelled_graphs(n)})


def block_probabilities(n, c, delta, flavor):
    """Edge probability between blocks (0/1) and block weights."""
    if flavor == "uniform" or delta == 0:
        p = min(c / n, 1.0)
        return [[p, p], [p, p]]
    a, b = min((c + delta) / n, 1.0), min((c - delta) / n, 1.0)
    if flavor == "planted-disassortative":
        a, b = b, a
    return [[a, b], [b, a]]


def brute_labelled_distribution(n, c, delta, flavor):
    """Probability of each labelled graph (dict edge-frozenset -> prob)."""
    pm = block_probabilities(n, c, delta, flavor)
    pairs = list(itertools.combinations(range(n), 2))
    out = {}
    for edges in all_labelled_graphs(n):
        total = 0.0
        for blocks in itertools.product((0, 1), repeat=n):
            pr = 0.5 ** n
            for i, j in pairs:
                p = pm[blocks[i]][blocks[j]]
                pr *= p if (i, j) in edges else 1.0 - p
            total += pr
        out[frozenset(edges)] = total
    return out


def brute_class_distribution(n, c, delta, flavor):
    dist = {}
    for edges, p in brute_labelled_distribution(n, c, delta, flavor).items():
        key = brute_canonical(n, edges)
        dist[key] = dist.get(key, 0.0) + p
    return dist


def lp_primal(p, q, d):
    """Transport LP solved directly by HiGHS (used against the package simplex)."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    q = q * (p.sum() / q.sum())
    m = len(p)
    a_eq = []
    for i in range(m):
        row = np.zeros((m, m))
        row[i, :] = 1
        a_eq.append(row.ravel())
    for j in range(m - 1):  # last column constraint is implied
        col = np.zeros((m, m))
        col[:, j] = 1
        a_eq.append(col.ravel())
    b_eq = np.concatenate([p, q[:-1]])
    res = linprog(np.asarray(d, float).ravel(), A_eq=np.array(a_eq), b_eq=b_eq,
                  bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return res.fun


def brute_cycles(n, edges, k):
    """Set of k-cycles as frozensets of edges."""
    adj = {v: set() for v in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    found = set()
    for verts in itertools.combinations(range(n), k):
        first = verts[0]
        for rest in itertools.permutations(verts[1:]):
            if rest[0] > rest[-1]:
                continue
            cyc = (first,) + rest
            if all(cyc[(t + 1) % k] in adj[cyc[t]] for t in range(k)):
                found.add(frozenset(tuple(sorted((cyc[t], cyc[(t + 1) % k]))) for t in range(k)))
    return found


def brute_packing(cycles):
    cycles = list(cycles)
    for size in range(len(cycles), 0, -1):
        for combo in itertools.combinations(cycles, size):
            if all(a.isdisjoint(b) for a, b in itertools.combinations(combo, 2)):
                return size
    return 0


def brute_overlapping_pairs(cycles):
    return sum(1 for a, b in itertools.combinations(list(cycles), 2) if not a.isdisjoint(b))


def brute_min_bisection(n, edges):
    best = None
    for side in itertools.combinations(range(n), n // 2):
        s = set(side)
        cut = sum(1 for i, j in edges if (i in s) != (j in s))
        best = cut if best is None else min(best, cut)
    return best


def falling_factorial(n, k):
    return math.prod(range(n - k + 1, n + 1))


def baseline_cost_by_spins(n, c, delta, flavor):
    """E sum_pairs |p_ij - q| over uniform spins: the maximal-coupling Hamming mean."""
    pm = block_probabilities(n, c, delta, flavor)
    q = min(c / n, 1.0)
    total = 0.0
    for blocks in itertools.product((0, 1), repeat=n):
        s = sum(abs(pm[blocks[i]][blocks[j]] - q) for i, j in itertools.combinations(range(n), 2))
        total += s * 0.5 ** n
    return total
