"""scikit-learn style wrappers: graphs in, witness features and labels out.

``X`` is a sequence of :class:`~sbmcoupling.graph.Graph`. Labels are 1 for
the planted model ``P`` and 0 for the uniform model ``Q``.

    >>> from sklearn.pipeline import make_pipeline
    >>> detector = make_pipeline(WitnessTransformer("packing:3"),
    ...                          ThresholdDetector(witness="precomputed"))
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateMeansError
from .stats import PACKING_EXACT_BUDGET, cycle_report
from .validation import check_graphs, check_labels
from .witnesses import parse_witness

__all__ = ["WitnessTransformer", "CycleStatistics", "ThresholdDetector"]


class WitnessTransformer(TransformerMixin, BaseEstimator):
    """Map each graph to one witness value (a single feature column)."""

    def __init__(self, witness="packing:3"):
        self.witness = witness

    def fit(self, X, y=None):
        check_graphs(X)
        self.witness_ = parse_witness(self.witness)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "witness_")
        graphs = check_graphs(X)
        return np.array([[self.witness_(g)] for g in graphs], dtype=float)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "witness_")
        return np.array([self.witness_.name], dtype=object)


class CycleStatistics(TransformerMixin, BaseEstimator):
    """Columns ``x_k, y_k, z_k`` for cycle length ``k``.

    After ``transform``, ``y_exact_`` records per graph whether the packing
    value is exact or a greedy lower bound.
    """

    def __init__(self, k=3, packing_budget=PACKING_EXACT_BUDGET, seed=0):
        self.k = k
        self.packing_budget = packing_budget
        self.seed = seed

    def fit(self, X, y=None):
        check_graphs(X)
        if int(self.k) < 3:
            raise ValueError("k must be at least 3")
        self.n_features_in_ = 1
        self.k_ = int(self.k)
        return self

    def transform(self, X):
        check_is_fitted(self, "k_")
        reports = [cycle_report(g, self.k_, self.packing_budget, self.seed) for g in check_graphs(X)]
        self.y_exact_ = np.array([r.y_k_exactness == "exact" for r in reports])
        return np.array([[r.x_k, r.y_k, r.z_k] for r in reports], dtype=float)

    def get_feature_names_out(self, input_features=None):
        k = self.k_ if hasattr(self, "k_") else int(self.k)
        return np.array([f"x_{k}", f"y_{k}", f"z_{k}"], dtype=object)


class ThresholdDetector(ClassifierMixin, BaseEstimator):
    """Midpoint threshold on a witness: planted iff on the planted mean's side.

    Parameters
    ----------
    witness : str or Witness
        Statistic evaluated on each graph, or ``"precomputed"`` when ``X``
        already holds one witness value per row.
    mean_p, mean_q : float, optional
        Known model means. When both are given ``fit`` does not need
        labels; otherwise they are the class means of the training data.

    A value exactly at the midpoint is labelled with the larger-mean model.
    """

    def __init__(self, witness="packing:3", mean_p=None, mean_q=None):
        self.witness = witness
        self.mean_p = mean_p
        self.mean_q = mean_q

    def _values(self, X):
        if self.witness == "precomputed":
            v = np.asarray(X, dtype=float)
            if v.ndim == 2:
                if v.shape[1] != 1:
                    raise ValueError("precomputed input must have exactly one column")
                v = v[:, 0]
            return v
        w = parse_witness(self.witness)
        return np.array([w(g) for g in check_graphs(X)], dtype=float)

    def fit(self, X, y=None):
        if self.mean_p is not None and self.mean_q is not None:
            mp, mq = float(self.mean_p), float(self.mean_q)
        else:
            if y is None:
                raise ValueError("labels are required unless mean_p and mean_q are set")
            v = self._values(X)
            labels = check_labels(y, len(v))
            if labels.min() == labels.max():
                raise ValueError("training data must contain both models")
            mp, mq = float(v[labels == 1].mean()), float(v[labels == 0].mean())
        if mp == mq:
            raise DegenerateMeansError("witness means coincide; the threshold is undefined")
        self.mean_p_, self.mean_q_ = mp, mq
        self.threshold_ = 0.5 * (mp + mq)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 1
        return self

    def decision_function(self, X):
        """Signed distance to the threshold, positive on the planted side."""
        check_is_fitted(self, "threshold_")
        v = self._values(X) - self.threshold_
        return v if self.mean_p_ > self.mean_q_ else -v

    def predict(self, X):
        check_is_fitted(self, "threshold_")
        v = self._values(X)
        if self.mean_p_ > self.mean_q_:
            return (v >= self.threshold_).astype(int)
        return (v < self.threshold_).astype(int)
