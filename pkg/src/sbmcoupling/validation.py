"""Input checks shared by the estimator classes and the CLI."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .exceptions import InvalidSpecError
from .graph import Graph
from .models import ModelSpec

__all__ = ["check_graphs", "check_model_spec", "check_labels", "check_grid"]


def check_graphs(X, same_n: bool = False) -> list[Graph]:
    """Coerce ``X`` to a nonempty list of :class:`Graph`.

    A single graph is wrapped into a one-element list.
    """
    if isinstance(X, Graph):
        return [X]
    if isinstance(X, np.ndarray) and X.dtype != object:
        raise TypeError("expected a sequence of Graph objects, got a numeric array")
    if not isinstance(X, Iterable):
        raise TypeError(f"expected a sequence of Graph objects, got {type(X).__name__}")
    graphs = list(X)
    if not graphs:
        raise ValueError("need at least one graph")
    bad = [type(g).__name__ for g in graphs if not isinstance(g, Graph)]
    if bad:
        raise TypeError(f"expected Graph objects, found {bad[0]}")
    if same_n and len({g.n for g in graphs}) > 1:
        raise ValueError("all graphs must share the same vertex count")
    return graphs


def check_model_spec(spec) -> ModelSpec:
    if isinstance(spec, ModelSpec):
        return spec
    if isinstance(spec, dict):
        try:
            return ModelSpec(**{k: spec[k] for k in ("n", "c", "delta", "flavor") if k in spec})
        except TypeError as exc:
            raise InvalidSpecError(str(exc)) from None
    raise InvalidSpecError(f"cannot build a model spec from {type(spec).__name__}")


def check_labels(y, n_samples: int) -> np.ndarray:
    """Binary labels, 1 for the planted model and 0 for the uniform one."""
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_samples:
        raise ValueError(f"y must be 1-d with {n_samples} entries")
    if y.dtype.kind in "US":
        y = np.where(y == "P", 1, np.where(y == "Q", 0, -1))
    y = y.astype(int)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1 or 'Q'/'P'")
    return y


def check_grid(values, name: str, kind=float) -> list:
    vals = [kind(v) for v in values]
    if not vals:
        raise ValueError(f"{name} grid must be nonempty")
    return vals
