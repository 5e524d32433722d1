"""Simple undirected labelled graphs and the edge-list text format."""

from __future__ import annotations

import io
import os
from typing import Iterable

import numpy as np

from ._kernels import build_csr
from .exceptions import InvalidVertexError

__all__ = [
    "Graph",
    "toggle_edge",
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
]


def _normalize(n: int, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if (arr < 0).any() or (arr >= n).any():
        raise InvalidVertexError(f"edge endpoint outside [0, {n})")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    if (lo == hi).any():
        raise InvalidVertexError("self-loops are not allowed")
    keys = np.unique(lo * n + hi)
    return np.stack([keys // n, keys % n], axis=1)


class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    Edges are kept as a sorted ``(m, 2)`` integer array with ``i < j`` in
    every row. Duplicate pairs collapse (set semantics).
    """

    __slots__ = ("_n", "_edges", "_edge_set", "_csr")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if not isinstance(edges, np.ndarray):
            edges = np.array(list(edges), dtype=np.int64)
        arr = _normalize(n, edges)
        arr.setflags(write=False)
        self._n = n
        self._edges = arr
        self._edge_set = None
        self._csr = None

    @classmethod
    def _trusted(cls, n: int, edges: np.ndarray) -> "Graph":
        # caller guarantees sorted unique rows with i < j < n
        g = cls.__new__(cls)
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        g._n = int(n)
        g._edges = edges
        g._edge_set = None
        g._csr = None
        return g

    @classmethod
    def complete(cls, n: int) -> "Graph":
        i, j = np.triu_indices(n, k=1)
        return cls._trusted(n, np.stack([i, j], axis=1))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edge_array(self) -> np.ndarray:
        return self._edges

    @property
    def edges(self) -> frozenset:
        if self._edge_set is None:
            self._edge_set = frozenset(map(tuple, self._edges.tolist()))
        return self._edge_set

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self.edges

    def degrees(self) -> np.ndarray:
        return np.bincount(self._edges.ravel(), minlength=self._n)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(indptr, indices)`` with sorted neighbour lists."""
        if self._csr is None:
            self._csr = build_csr(self._n, self._edges)
        return self._csr

    def adjacency_masks(self) -> np.ndarray:
        """Per-vertex neighbour bitmasks (``n <= 63``)."""
        if self._n > 63:
            raise ValueError("bitmask adjacency needs n <= 63")
        masks = np.zeros(self._n, dtype=np.int64)
        for i, j in self._edges.tolist():
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self._n, self._n), dtype=np.int8)
        e = self._edges
        a[e[:, 0], e[:, 1]] = 1
        a[e[:, 1], e[:, 0]] = 1
        return a

    def relabel(self, perm) -> "Graph":
        """Image of the graph under the vertex map ``v -> perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self._n,) or not np.array_equal(np.sort(perm), np.arange(self._n)):
            raise ValueError("perm must be a permutation of range(n)")
        return Graph(self._n, perm[self._edges])

    def without_edges(self, rows: np.ndarray) -> "Graph":
        keep = np.ones(len(self._edges), dtype=bool)
        keep[rows] = False
        return Graph._trusted(self._n, self._edges[keep])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self):
        if len(self._edges) <= 8:
            return f"Graph(n={self._n}, edges={sorted(self.edges)})"
        return f"Graph(n={self._n}, m={len(self._edges)})"


def toggle_edge(g: Graph, i: int, j: int) -> Graph:
    """Flip the pair ``{i, j}``: add it if absent, remove it if present."""
    i, j = int(i), int(j)
    if i == j or not (0 <= i < g.n and 0 <= j < g.n):
        raise InvalidVertexError(f"cannot toggle ({i}, {j}) on {g.n} vertices")
    if i > j:
        i, j = j, i
    e = g.edge_array
    key = e[:, 0] * g.n + e[:, 1]
    target = i * g.n + j
    pos = int(np.searchsorted(key, target))
    if pos < len(key) and key[pos] == target:
        return g.without_edges(np.array([pos]))
    new = np.insert(e, pos, [i, j], axis=0)
    return Graph._trusted(g.n, new)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.num_edges}"]
    lines.extend(f"{i} {j}" for i, j in g.edge_array.tolist())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("edge list must start with a 'n m' header line")
    n, m = int(tokens[0]), int(tokens[1])
    body = np.array(tokens[2:], dtype=np.int64)
    if body.size != 2 * m:
        raise ValueError(f"header promises {m} edges, found {body.size / 2:g}")
    g = Graph(n, body.reshape(-1, 2))
    if g.num_edges != m:
        raise ValueError("edge list contains duplicate edges")
    return g


def read_edge_list(path) -> Graph:
    if isinstance(path, io.TextIOBase):
        return parse_edge_list(path.read())
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: Graph, path) -> None:
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g))
