"""Sparse kernel random graphs: the uniform model, planted bisections, SBM.

A kernel model ``G(n, kappa)`` draws i.i.d. uniform vertex types and joins
``i, j`` independently with probability ``kappa(x_i, x_j) / n`` clipped to
``[0, 1]``. Only step kernels are supported, so sampling reduces to one
Bernoulli field per block pair, drawn by geometric skipping.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .classes import CanonicalClass, class_table
from .exceptions import CapExceededError, InvalidSpecError, ProbabilityMassError
from .graph import Graph

__all__ = [
    "FLAVORS",
    "BlockKernel",
    "ModelSpec",
    "TypedSample",
    "GraphDistribution",
    "make_rng",
    "sample_kernel_graph",
    "sample_sbm",
    "sample_graph",
    "exact_distribution",
    "pair_probability_matrix",
    "EXACT_CAP",
    "EXACT_CAP_OPT_IN",
]

UNIFORM = "uniform"
ASSORTATIVE = "planted-assortative"
DISASSORTATIVE = "planted-disassortative"
FLAVORS = (UNIFORM, ASSORTATIVE, DISASSORTATIVE)
_ALIASES = {
    "q": UNIFORM,
    "assortative": ASSORTATIVE,
    "sbm": ASSORTATIVE,
    "p": ASSORTATIVE,
    "disassortative": DISASSORTATIVE,
    "kernel": DISASSORTATIVE,
}

EXACT_CAP = 6
EXACT_CAP_OPT_IN = 7


def make_rng(seed) -> np.random.Generator:
    """Seeded PCG64 generator; ``seed`` may be an int, a sequence or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class BlockKernel:
    """Symmetric step kernel on the unit square.

    ``boundaries`` are the breakpoints ``0 = b_0 < ... < b_B = 1``;
    ``values[r, s]`` is the kernel on block ``r`` times block ``s``.
    """

    boundaries: tuple
    values: tuple

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or len(b) < 2 or b[0] != 0.0 or b[-1] != 1.0 or (np.diff(b) <= 0).any():
            raise InvalidSpecError("boundaries must increase strictly from 0 to 1")
        k = len(b) - 1
        if v.shape != (k, k):
            raise InvalidSpecError(f"values must be {k}x{k} for {k} blocks")
        if not np.isfinite(v).all() or (v < 0).any():
            raise InvalidSpecError("kernel values must be finite and nonnegative")
        if not np.allclose(v, v.T, rtol=0, atol=0):
            raise InvalidSpecError("kernel values must be symmetric")
        object.__setattr__(self, "boundaries", tuple(b.tolist()))
        object.__setattr__(self, "values", tuple(map(tuple, v.tolist())))

    @classmethod
    def constant(cls, value: float) -> "BlockKernel":
        return cls((0.0, 1.0), ((float(value),),))

    @property
    def num_blocks(self) -> int:
        return len(self.boundaries) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def value_matrix(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def sup(self) -> float:
        return float(self.value_matrix.max())

    def block_of(self, x) -> np.ndarray:
        b = np.asarray(self.boundaries)
        idx = np.searchsorted(b, np.asarray(x), side="right") - 1
        return np.clip(idx, 0, self.num_blocks - 1)

    def edge_probabilities(self, n: int) -> np.ndarray:
        return _clipped_probabilities(self, int(n))


@lru_cache(maxsize=256)
def _clipped_probabilities(kernel: BlockKernel, n: int) -> np.ndarray:
    prob = np.clip(kernel.value_matrix / n, 0.0, 1.0)
    prob.setflags(write=False)
    return prob


@dataclass(frozen=True)
class ModelSpec:
    """``(n, c, delta, flavor)``.

    ``uniform`` is the constant kernel ``c``. ``planted-assortative`` is the
    two-community SBM with ``c + delta`` inside communities and ``c - delta``
    across; ``planted-disassortative`` swaps the two, i.e. ``c + delta`` on
    the off-diagonal half-squares.
    """

    n: int
    c: float
    delta: float = 0.0
    flavor: str = UNIFORM

    def __post_init__(self):
        flavor = _ALIASES.get(str(self.flavor).lower(), str(self.flavor).lower())
        if flavor not in FLAVORS:
            raise InvalidSpecError(f"unknown flavor {self.flavor!r}; expected one of {FLAVORS}")
        object.__setattr__(self, "flavor", flavor)
        n, c, d = int(self.n), float(self.c), float(self.delta)
        if n < 1:
            raise InvalidSpecError("n must be a positive integer")
        if not (math.isfinite(c) and c > 0):
            raise InvalidSpecError("c must be a positive real")
        if not (math.isfinite(d) and 0 <= d <= c):
            raise InvalidSpecError(f"need 0 <= delta <= c, got delta={d}, c={c}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "delta", d)

    @property
    def planted(self) -> bool:
        return self.flavor != UNIFORM

    @property
    def within(self) -> float:
        """Kernel value for two vertices of the same community."""
        if self.flavor == ASSORTATIVE:
            return self.c + self.delta
        if self.flavor == DISASSORTATIVE:
            return self.c - self.delta
        return self.c

    @property
    def across(self) -> float:
        if self.flavor == ASSORTATIVE:
            return self.c - self.delta
        if self.flavor == DISASSORTATIVE:
            return self.c + self.delta
        return self.c

    @property
    def sup(self) -> float:
        return max(self.within, self.across)

    def kernel(self) -> BlockKernel:
        return _spec_kernel(self.c, self.within, self.across, self.planted)

    def uniform_twin(self) -> "ModelSpec":
        return ModelSpec(self.n, self.c, self.delta, UNIFORM)

    def with_(self, **changes) -> "ModelSpec":
        fields = {"n": self.n, "c": self.c, "delta": self.delta, "flavor": self.flavor}
        fields.update(changes)
        return ModelSpec(**fields)

    def to_dict(self) -> dict:
        return {"n": self.n, "c": self.c, "delta": self.delta, "flavor": self.flavor}


@lru_cache(maxsize=256)
def _spec_kernel(c, within, across, planted):
    if not planted:
        return BlockKernel.constant(c)
    return BlockKernel((0.0, 0.5, 1.0), ((within, across), (across, within)))


@dataclass(frozen=True)
class TypedSample:
    graph: Graph
    types: np.ndarray
    blocks: np.ndarray = field(default=None)

    def __post_init__(self):
        if len(self.types) != self.graph.n:
            raise ValueError("one type per vertex required")


def _bernoulli_positions(rng: np.random.Generator, count: int, p: float) -> np.ndarray:
    """Sorted positions in ``[0, count)`` each kept independently with prob ``p``."""
    if count <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(count, dtype=np.int64)
    chunks = []
    pos = -1
    expected = count * p
    batch = int(expected + 6.0 * math.sqrt(expected) + 16)
    while True:
        gaps = rng.geometric(p, size=batch)
        steps = pos + np.cumsum(gaps)
        if steps[-1] >= count:
            chunks.append(steps[steps < count])
            break
        chunks.append(steps)
        pos = int(steps[-1])
    return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


def _triangle_pairs(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # t = j (j - 1) / 2 + i with 0 <= i < j
    j = ((1.0 + np.sqrt(1.0 + 8.0 * t)) / 2.0).astype(np.int64)
    j -= (j * (j - 1) // 2) > t
    j += ((j + 1) * j // 2) <= t
    i = t - j * (j - 1) // 2
    return i, j


def _sample_block_edges(rng: np.random.Generator, n: int, blocks: np.ndarray,
                        prob: np.ndarray) -> Graph:
    members = [np.flatnonzero(blocks == r) for r in range(prob.shape[0])]
    parts = []
    for r, mr in enumerate(members):
        s = len(mr)
        t = _bernoulli_positions(rng, s * (s - 1) // 2, float(prob[r, r]))
        if len(t):
            i, j = _triangle_pairs(t)
            parts.append(np.stack([mr[i], mr[j]], axis=1))
        for q in range(r + 1, len(members)):
            mq = members[q]
            t = _bernoulli_positions(rng, s * len(mq), float(prob[r, q]))
            if len(t):
                a, b = np.divmod(t, len(mq))
                parts.append(np.stack([mr[a], mq[b]], axis=1))
    if not parts:
        return Graph._trusted(n, np.empty((0, 2), dtype=np.int64))
    e = np.concatenate(parts)
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keys = np.sort(lo * n + hi)
    return Graph._trusted(n, np.stack([keys // n, keys % n], axis=1))


def sample_kernel_graph(model, seed, n: int | None = None) -> TypedSample:
    """Draw from ``G(n, kappa)`` for a :class:`ModelSpec` or :class:`BlockKernel`.

    Vertex types are i.i.d. uniform on ``[0, 1]``; pairs are joined with
    probability ``kappa(x_i, x_j) / n`` clipped to ``[0, 1]``.
    """
    if isinstance(model, ModelSpec):
        kernel, n = model.kernel(), model.n
    elif isinstance(model, BlockKernel):
        if n is None:
            raise InvalidSpecError("n is required when sampling from a bare kernel")
        kernel = model
    else:
        raise InvalidSpecError(f"cannot sample from {type(model).__name__}")
    n = int(n)
    if n < 1:
        raise InvalidSpecError("n must be positive")
    rng = make_rng(seed)
    x = rng.random(n)
    blocks = kernel.block_of(x)
    g = _sample_block_edges(rng, n, blocks, kernel.edge_probabilities(n))
    return TypedSample(g, x, blocks)


def sample_sbm(spec: ModelSpec, seed) -> TypedSample:
    """Two-community SBM with i.i.d. uniform spins in ``{-1, +1}``.

    Same-spin pairs use ``spec.within / n``, opposite-spin pairs
    ``spec.across / n``. Requires ``c + delta <= n`` so no clipping occurs.
    """
    if not spec.planted:
        raise InvalidSpecError("sample_sbm needs a planted flavor")
    if spec.c + spec.delta > spec.n:
        raise InvalidSpecError(f"c + delta = {spec.c + spec.delta} exceeds n = {spec.n}")
    rng = make_rng(seed)
    spins = np.where(rng.random(spec.n) < 0.5, 1, -1).astype(np.int8)
    blocks = (spins < 0).astype(np.int64)
    prob = spec.kernel().edge_probabilities(spec.n)
    g = _sample_block_edges(rng, spec.n, blocks, prob)
    return TypedSample(g, spins, blocks)


def sample_graph(spec: ModelSpec, seed) -> Graph:
    """Graph-only convenience sampler used by the Monte Carlo drivers."""
    if spec.planted and spec.c + spec.delta <= spec.n:
        return sample_sbm(spec, seed).graph
    return sample_kernel_graph(spec, seed).graph


def pair_probability_matrix(kernel: BlockKernel, blocks: np.ndarray, n: int) -> np.ndarray:
    prob = kernel.edge_probabilities(n)
    return prob[np.ix_(blocks, blocks)]


@dataclass(frozen=True)
class GraphDistribution:
    """Probability of every isomorphism class on ``n`` vertices."""

    classes: tuple
    probabilities: np.ndarray
    spec: ModelSpec | None = None

    @property
    def n(self) -> int:
        return self.classes[0].representative.n

    def __len__(self):
        return len(self.classes)

    def expectation(self, values) -> float:
        return float(np.dot(self.probabilities, np.asarray(values, dtype=float)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class_index", "class_size", "probability"])
        for cls, p in zip(self.classes, self.probabilities.tolist()):
            w.writerow([cls.index, cls.class_size, repr(float(p))])
        return buf.getvalue()


def _labelled_probabilities(prob_pairs: np.ndarray) -> np.ndarray:
    # index = code, first pair is the most significant bit
    out = np.ones(1)
    for p in prob_pairs.tolist():
        out = np.stack([out * (1.0 - p), out * p], axis=1).ravel()
    return out


def exact_distribution(spec: ModelSpec, classes: list[CanonicalClass] | None = None,
                       allow_n7: bool = False) -> GraphDistribution:
    """Exact class probabilities by averaging over every block assignment.

    Each labelled graph gets ``sum_assign w(assign) prod_pairs p or (1 - p)``
    where ``w`` is the product of the chosen block widths; the labelled
    probabilities are then summed within each isomorphism class.
    """
    n = spec.n
    cap = EXACT_CAP_OPT_IN if allow_n7 else EXACT_CAP
    if n > cap:
        raise CapExceededError(
            f"exact distributions are capped at n <= {cap}"
            + ("" if allow_n7 else " (n = 7 needs allow_n7=True)")
        )
    table = class_table(n)
    if classes is None:
        classes = table.classes
    kernel = spec.kernel()
    widths = kernel.widths
    iu, ju = np.triu_indices(n, k=1)
    labelled = np.zeros(1 << len(iu))
    for assign in product(range(kernel.num_blocks), repeat=n):
        assign = np.array(assign, dtype=np.int64)
        w = float(np.prod(widths[assign]))
        probs = pair_probability_matrix(kernel, assign, n)[iu, ju]
        labelled += w * _labelled_probabilities(probs)
    per_class = np.bincount(table.label, weights=labelled, minlength=len(table))
    total = per_class.sum()
    if abs(total - 1.0) > 1e-12:
        raise ProbabilityMassError(f"class probabilities sum to {total!r}")
    idx = np.array([table.index_of(c.representative) for c in classes], dtype=np.int64)
    out = per_class[idx]
    out.setflags(write=False)
    return GraphDistribution(tuple(classes), out, spec)
