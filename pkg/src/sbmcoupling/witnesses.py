"""Named graph statistics used as transport witnesses and detector inputs.

Names: ``edges``, ``cycles:k``, ``packing:k``, ``bisection``, ``constant``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .exceptions import InvalidSpecError
from .graph import Graph
from .models import ModelSpec
from .stats import (
    BISECTION_EXACT_CAP,
    count_k_cycles,
    expected_cycles_planted_limit,
    expected_cycles_uniform,
    max_disjoint_packing,
    min_bisection,
)

__all__ = ["Witness", "parse_witness", "closed_form_mean"]


@dataclass(frozen=True)
class Witness:
    name: str
    kind: str
    k: int | None
    fn: Callable[[Graph], float]
    lipschitz: bool

    def __call__(self, g: Graph) -> float:
        return self.fn(g)


def _bisection_value(g: Graph) -> float:
    mode = "exact" if g.n <= BISECTION_EXACT_CAP else "heuristic"
    return float(min_bisection(g, mode=mode, seed=0).value)


def parse_witness(name) -> Witness:
    """Resolve a witness name (or pass a :class:`Witness` through)."""
    if isinstance(name, Witness):
        return name
    if callable(name):
        return Witness(getattr(name, "__name__", "custom"), "custom", None, name, False)
    text = str(name).strip().lower()
    kind, _, arg = text.partition(":")
    if kind in ("cycles", "packing"):
        try:
            k = int(arg)
        except ValueError:
            raise InvalidSpecError(f"witness {name!r} needs a cycle length, e.g. '{kind}:3'") from None
        if k < 3:
            raise InvalidSpecError("cycle length must be at least 3")
        if kind == "cycles":
            return Witness(f"cycles:{k}", kind, k, lambda g: float(count_k_cycles(g, k)), False)
        return Witness(f"packing:{k}", kind, k, lambda g: float(max_disjoint_packing(g, k)[0]), True)
    if arg:
        raise InvalidSpecError(f"witness {kind!r} takes no argument")
    if kind == "edges":
        return Witness("edges", kind, None, lambda g: float(g.num_edges), True)
    if kind == "bisection":
        return Witness("bisection", kind, None, _bisection_value, True)
    if kind == "constant":
        return Witness("constant", kind, None, lambda g: 0.0, True)
    raise InvalidSpecError(
        f"unknown witness {name!r}; expected edges, cycles:k, packing:k, bisection or constant"
    )


def closed_form_mean(witness, spec: ModelSpec) -> float | None:
    """Model mean of a witness when a closed form is available, else ``None``.

    Cycle witnesses use the exact finite-n formula under the uniform model
    and the large-n formula under planted models; ``packing:k`` shares the
    cycle-count mean up to the vanishing overlap correction.
    """
    w = parse_witness(witness)
    if w.kind == "edges":
        if spec.planted:
            return _planted_edge_mean(spec)
        return math.comb(spec.n, 2) * min(spec.c / spec.n, 1.0)
    if w.kind in ("cycles", "packing"):
        if spec.planted:
            return expected_cycles_planted_limit(w.k, spec.c, spec.delta, spec.flavor)
        return expected_cycles_uniform(spec.n, w.k, spec.c)
    if w.kind == "constant":
        return 0.0
    return None


def _planted_edge_mean(spec: ModelSpec) -> float:
    n = spec.n
    pw, pa = min(spec.within / n, 1.0), min(spec.across / n, 1.0)
    # E[s (n - s)] = n (n - 1) / 4 for s ~ Binomial(n, 1/2)
    across = n * (n - 1) / 4
    within = math.comb(n, 2) - across
    return within * pw + across * pa
