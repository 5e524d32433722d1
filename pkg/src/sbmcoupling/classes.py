"""Isomorphism classes of tiny graphs and the exact edit distance between them.

Labelled graphs on ``n`` vertices are encoded as integers: the vertex pairs
are listed in lexicographic order ``(0,1), (0,2), ..., (n-2,n-1)`` and pair
``t`` occupies bit ``m - 1 - t``, so comparing codes as integers compares
edge bitstrings lexicographically. The canonical representative of a class
is its minimum code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numba
import numpy as np

from .exceptions import CapExceededError, SizeMismatchError
from .graph import Graph

__all__ = [
    "EDIT_DISTANCE_CAP",
    "ENUMERATION_CAP",
    "CanonicalClass",
    "ClassTable",
    "edit_distance",
    "enumerate_classes",
    "distance_matrix",
    "class_table",
    "canonical_code",
    "graph_code",
]

EDIT_DISTANCE_CAP = 8
ENUMERATION_CAP = 7


@dataclass(frozen=True)
class CanonicalClass:
    representative: Graph
    class_size: int
    index: int
    code: int

    @property
    def n(self) -> int:
        return self.representative.n


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    out = np.array(list(permutations(range(n))), dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _pair_index(n: int) -> np.ndarray:
    idx = np.full((n, n), -1, dtype=np.int64)
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            idx[i, j] = idx[j, i] = t
            t += 1
    idx.setflags(write=False)
    return idx


def graph_code(g: Graph) -> int:
    """Integer code of the labelled graph ``g``."""
    m = g.n * (g.n - 1) // 2
    pidx = _pair_index(g.n)
    code = 0
    for i, j in g.edge_array.tolist():
        code |= 1 << (m - 1 - int(pidx[i, j]))
    return code


def graph_from_code(n: int, code: int) -> Graph:
    m = n * (n - 1) // 2
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, [pairs[t] for t in range(m) if (code >> (m - 1 - t)) & 1])


def _check_pair(g: Graph, h: Graph) -> None:
    if g.n != h.n:
        raise SizeMismatchError(f"graphs have {g.n} and {h.n} vertices")
    if g.n > EDIT_DISTANCE_CAP:
        raise CapExceededError(
            f"exact edit distance is capped at n <= {EDIT_DISTANCE_CAP}, got {g.n}"
        )


def edit_distance(g: Graph, h: Graph) -> int:
    """Fewest edge flips turning ``h`` into an isomorphic copy of ``g``.

    Exhaustive over all vertex permutations: ``|E(pi g) ^ E(h)|`` equals
    ``|E(g)| + |E(h)| - 2 * overlap`` so it suffices to maximise the overlap.
    Stops early once the overlap reaches ``min(|E(g)|, |E(h)|)``.
    """
    _check_pair(g, h)
    mg, mh = g.num_edges, h.num_edges
    if mg == 0 or mh == 0 or g.n < 2:
        return mg + mh
    ah = h.adjacency_matrix()
    e = g.edge_array
    perms = _permutations(g.n)
    ceiling = min(mg, mh)
    best = 0
    chunk = 4096
    for start in range(0, len(perms), chunk):
        p = perms[start:start + chunk]
        overlap = ah[p[:, e[:, 0]], p[:, e[:, 1]]].sum(axis=1).max()
        best = max(best, int(overlap))
        if best == ceiling:
            break
    return mg + mh - 2 * best


def canonical_code(g: Graph) -> int:
    """Minimum code over all relabellings of ``g`` (``n <= 8``)."""
    if g.n > EDIT_DISTANCE_CAP:
        raise CapExceededError(f"canonical form is capped at n <= {EDIT_DISTANCE_CAP}")
    n = g.n
    m = n * (n - 1) // 2
    if m == 0 or g.num_edges == 0:
        return 0
    pidx = _pair_index(n)
    perms = _permutations(n)
    e = g.edge_array
    bits = m - 1 - pidx[perms[:, e[:, 0]], perms[:, e[:, 1]]]
    codes = (np.int64(1) << bits).sum(axis=1)
    return int(codes.min())


@numba.njit(cache=True)
def _orbit_labels(m, perm_maps):
    total = 1 << m
    n_perms = perm_maps.shape[0]
    label = np.full(total, -1, dtype=np.int32)
    reps = np.empty(total, dtype=np.int64)
    sizes = np.empty(total, dtype=np.int64)
    n_classes = 0
    for code in range(total):
        if label[code] >= 0:
            continue
        # ascending scan: the first unlabelled code is its orbit's minimum
        reps[n_classes] = code
        count = 0
        for p in range(n_perms):
            img = 0
            for t in range(m):
                if (code >> (m - 1 - t)) & 1:
                    img |= 1 << (m - 1 - perm_maps[p, t])
            if label[img] < 0:
                label[img] = n_classes
                count += 1
        sizes[n_classes] = count
        n_classes += 1
    return label, reps[:n_classes].copy(), sizes[:n_classes].copy()


@numba.njit(cache=True)
def _class_graph_distances(m, label, reps):
    # d1 is the geodesic metric of the graph on classes joined by one flip
    n_classes = reps.shape[0]
    nbr = np.full((n_classes, m), -1, dtype=np.int64)
    for c in range(n_classes):
        for t in range(m):
            nbr[c, t] = label[reps[c] ^ (1 << t)]
    dist = np.full((n_classes, n_classes), -1, dtype=np.int64)
    queue = np.empty(n_classes, dtype=np.int64)
    for s in range(n_classes):
        dist[s, s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            x = queue[head]
            head += 1
            for t in range(m):
                y = nbr[x, t]
                if dist[s, y] < 0:
                    dist[s, y] = dist[s, x] + 1
                    queue[tail] = y
                    tail += 1
    return dist


class ClassTable:
    """All isomorphism classes on ``n`` vertices plus a code -> class lookup."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        if n > ENUMERATION_CAP:
            raise CapExceededError(
                f"class enumeration is capped at n <= {ENUMERATION_CAP}, got {n}"
            )
        self.n = n
        self.m = n * (n - 1) // 2
        pidx = _pair_index(n)
        iu, ju = np.triu_indices(n, k=1)
        perms = _permutations(n)
        perm_maps = np.ascontiguousarray(pidx[perms[:, iu], perms[:, ju]]) if self.m else (
            np.zeros((len(perms), 0), dtype=np.int64)
        )
        label, reps, sizes = _orbit_labels(self.m, perm_maps)
        label.setflags(write=False)
        self.label = label
        self.codes = reps
        self.sizes = sizes
        self.classes = [
            CanonicalClass(graph_from_code(n, int(code)), int(size), idx, int(code))
            for idx, (code, size) in enumerate(zip(reps.tolist(), sizes.tolist()))
        ]
        self._distances = None

    def __len__(self):
        return len(self.classes)

    def index_of(self, g: Graph) -> int:
        if g.n != self.n:
            raise SizeMismatchError(f"graph has {g.n} vertices, table is for {self.n}")
        return int(self.label[graph_code(g)])

    def indices_of_codes(self, codes: np.ndarray) -> np.ndarray:
        return self.label[np.asarray(codes, dtype=np.int64)]

    def distances(self) -> np.ndarray:
        if self._distances is None:
            d = _class_graph_distances(self.m, self.label, self.codes)
            d.setflags(write=False)
            self._distances = d
        return self._distances


@lru_cache(maxsize=None)
def class_table(n: int) -> ClassTable:
    return ClassTable(n)


def enumerate_classes(n: int) -> list[CanonicalClass]:
    """Isomorphism classes on ``n`` vertices ordered by canonical code.

    Sizes sum to ``2 ** (n choose 2)``. Capped at ``n <= 7``.
    """
    return list(class_table(n).classes)


def distance_matrix(classes: list[CanonicalClass]) -> np.ndarray:
    """Pairwise edit distances between class representatives.

    Each representative is located in the class table for its ``n`` and
    the distance read from a shortest-path table over the one-flip class
    graph. Capped at ``n <= 7``.
    """
    if not classes:
        return np.zeros((0, 0), dtype=np.int64)
    ns = {c.representative.n for c in classes}
    if len(ns) != 1:
        raise SizeMismatchError(f"classes mix vertex counts {sorted(ns)}")
    n = ns.pop()
    table = class_table(n)
    idx = np.array([table.index_of(c.representative) for c in classes])
    return np.array(table.distances()[np.ix_(idx, idx)])
