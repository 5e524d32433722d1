"""Compiled inner loops: cycle search on CSR adjacency and bisection search."""

import numba
import numpy as np


@numba.njit(cache=True)
def build_csr(n, edges):
    # rows of edges are sorted, so filling in order keeps every list sorted
    indptr = np.zeros(n + 1, dtype=np.int64)
    for t in range(edges.shape[0]):
        indptr[edges[t, 0] + 1] += 1
        indptr[edges[t, 1] + 1] += 1
    for v in range(n):
        indptr[v + 1] += indptr[v]
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[n], dtype=np.int64)
    for t in range(edges.shape[0]):
        i = edges[t, 0]
        j = edges[t, 1]
        indices[fill[i]] = j
        fill[i] += 1
        indices[fill[j]] = i
        fill[j] += 1
    return indptr, indices


@numba.njit(cache=True)
def two_core_mask(n, indptr, indices):
    deg = np.empty(n, dtype=np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
    alive = np.ones(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for v in range(n):
        if deg[v] < 2:
            alive[v] = False
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if alive[w]:
                deg[w] -= 1
                if deg[w] < 2:
                    alive[w] = False
                    stack[top] = w
                    top += 1
    return alive


@numba.njit(cache=True)
def _walk_cycles(n, indptr, indices, kmax, budget, record_k, out):
    # Depth-first search for simple cycles whose minimum vertex is the start s.
    # A ball of radius kmax // 2 around s (through vertices > s) prunes any
    # branch that can no longer return to s within kmax steps.
    counts = np.zeros(kmax + 1, dtype=np.int64)
    alive = two_core_mask(n, indptr, indices)
    onpath = np.zeros(n, dtype=np.bool_)
    path = np.empty(kmax, dtype=np.int64)
    nxt = np.empty(kmax, dtype=np.int64)
    far = kmax + 1
    radius = kmax // 2
    dist = np.full(n, far, dtype=np.int64)
    ball = np.empty(n, dtype=np.int64)
    total = 0
    row = 0
    for s in range(n):
        if not alive[s]:
            continue
        dist[s] = 0
        ball[0] = s
        size = 1
        head = 0
        while head < size:
            v = ball[head]
            head += 1
            if dist[v] >= radius:
                continue
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if w > s and alive[w] and dist[w] == far:
                    dist[w] = dist[v] + 1
                    ball[size] = w
                    size += 1
        path[0] = s
        onpath[s] = True
        nxt[0] = indptr[s]
        depth = 0
        while depth >= 0:
            v = path[depth]
            if nxt[depth] < indptr[v + 1]:
                w = indices[nxt[depth]]
                nxt[depth] += 1
                if w == s:
                    if depth >= 2:
                        counts[depth + 1] += 1
                        total += 1
                        if total > budget:
                            for t in range(size):
                                dist[ball[t]] = far
                            onpath[:] = False
                            return counts, row, False
                        # keep one of the two orientations
                        if record_k == depth + 1 and path[1] < path[depth]:
                            for t in range(record_k):
                                out[row, t] = path[t]
                            row += 1
                    continue
                if w < s or onpath[w] or not alive[w]:
                    continue
                left = kmax - depth - 1
                if dist[w] > left and not (dist[w] == far and left > radius):
                    continue
                depth += 1
                path[depth] = w
                onpath[w] = True
                nxt[depth] = indptr[w]
            else:
                onpath[v] = False
                depth -= 1
        for t in range(size):
            dist[ball[t]] = far
    return counts, row, True


@numba.njit(cache=True)
def count_cycles_upto(n, indptr, indices, kmax, budget):
    """Directed closings per length; cycle counts are half of these.

    Each simple cycle is found from its minimum vertex in both directions.
    Returns ``(counts, ok)``; ``ok`` is False once the number of closings
    passes ``budget``.
    """
    out = np.empty((0, 1), dtype=np.int64)
    counts, _, ok = _walk_cycles(n, indptr, indices, kmax, budget, 0, out)
    return counts, ok


@numba.njit(cache=True)
def list_cycles(n, indptr, indices, k, count):
    """The ``count`` k-cycles, one row each, rotated to start at their minimum."""
    # shorter cycles are walked too, so the closing budget cannot be tied
    # to count; rows are bounded by count because count is exact
    out = np.empty((count, k), dtype=np.int64)
    _, row, _ = _walk_cycles(n, indptr, indices, k, np.int64(2) ** 62, k, out)
    return out[:row]


@numba.njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@numba.njit(cache=True)
def exact_bisection(n, masks):
    """Minimum cut over all balanced bipartitions, by Gosper's hack.

    Enumerates sides ``S`` with ``|S| = n // 2``; for even ``n`` only sides
    containing vertex 0 are evaluated. Returns ``(cut, S)``.
    """
    full = (np.int64(1) << n) - 1
    half = n // 2
    if half == 0:
        return 0, np.int64(0)
    best = np.int64(-1)
    best_set = np.int64(0)
    s = (np.int64(1) << half) - 1
    while s <= full:
        if n % 2 == 1 or (s & 1):
            cut = 0
            rest = s
            while rest:
                low = rest & -rest
                v = 0
                t = low
                while t > 1:
                    t >>= 1
                    v += 1
                cut += _popcount(masks[v] & ~s & full)
                rest ^= low
            if best < 0 or cut < best:
                best = cut
                best_set = s
        c = s & -s
        r = s + c
        s = (((r ^ s) >> 2) // c) | r
    return best, best_set


@numba.njit(cache=True)
def _cut_size(n, indptr, indices, side):
    cut = 0
    for v in range(n):
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if w > v and side[v] != side[w]:
                cut += 1
    return cut


@numba.njit(cache=True)
def cut_size(n, indptr, indices, side):
    return _cut_size(n, indptr, indices, side)


@numba.njit(cache=True)
def fm_refine(n, indptr, indices, side, max_passes):
    """Fiduccia-Mattheyses passes with alternating single moves.

    Each pass moves every vertex at most once, always from the larger side
    (either side when balanced), then rolls back to the best balanced prefix.
    ``side`` is modified in place; returns the final cut.
    """
    gain = np.empty(n, dtype=np.int64)
    locked = np.zeros(n, dtype=np.bool_)
    moves = np.empty(n, dtype=np.int64)
    cut = _cut_size(n, indptr, indices, side)
    for _ in range(max_passes):
        size1 = 0
        for v in range(n):
            size1 += side[v]
            locked[v] = False
            g = 0
            for p in range(indptr[v], indptr[v + 1]):
                g += 1 if side[indices[p]] != side[v] else -1
            gain[v] = g
        size0 = n - size1
        start_cut = cut
        best_cut = cut
        best_len = 0
        nmoves = 0
        for step in range(n):
            if size0 > size1:
                src = 0
            elif size1 > size0:
                src = 1
            else:
                src = -1
            pick = -1
            for v in range(n):
                if locked[v] or (src >= 0 and side[v] != src):
                    continue
                if pick < 0 or gain[v] > gain[pick]:
                    pick = v
            if pick < 0:
                break
            v = pick
            cut -= gain[v]
            old = side[v]
            side[v] = 1 - old
            if old == 1:
                size1 -= 1
                size0 += 1
            else:
                size0 -= 1
                size1 += 1
            locked[v] = True
            gain[v] = -gain[v]
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if side[w] == old:
                    gain[w] += 2
                else:
                    gain[w] -= 2
            moves[nmoves] = v
            nmoves += 1
            if abs(size0 - size1) <= n % 2 and cut < best_cut:
                best_cut = cut
                best_len = nmoves
        for t in range(nmoves - 1, best_len - 1, -1):
            v = moves[t]
            side[v] = 1 - side[v]
        cut = best_cut
        if best_cut >= start_cut:
            break
    return cut
