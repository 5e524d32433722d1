"""Detection experiments around the ``delta = sqrt(c)`` threshold.

A witness statistic with different means under the planted and uniform
models gives a detector by thresholding at the midpoint of the two means.
The helpers here measure such detectors, check the ``Var f <= d n``
concentration of 1-Lipschitz witnesses, and apply the short-cycle removal
adversary that defeats cycle-based detectors with few edits.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DegenerateMeansError
from .graph import Graph
from .models import ModelSpec, make_rng, sample_graph
from .montecarlo import MonteCarloEstimate, map_seeds, spawn_seeds
from .stats import _check_k, enumerate_cycles
from .witnesses import closed_form_mean, parse_witness

__all__ = [
    "P_LABEL",
    "Q_LABEL",
    "EstimatorResult",
    "VarianceReport",
    "threshold_estimator",
    "efron_stein_check",
    "efron_stein_estimate",
    "remove_short_cycles",
    "detection_accuracy",
    "detection_sweep",
    "results_to_csv",
]

P_LABEL = "P"
Q_LABEL = "Q"


@dataclass(frozen=True)
class EstimatorResult:
    accuracy: float
    n_trials: int
    threshold_used: float
    witness_name: str
    mean_p: float
    mean_q: float
    delta: float | None = None
    n: int | None = None
    mean_edits: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")

    @property
    def se(self) -> float:
        a = self.accuracy
        return math.sqrt(a * (1.0 - a) / self.n_trials)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["se"] = self.se
        return out


@dataclass(frozen=True)
class VarianceReport:
    witness_name: str
    n_grid: tuple
    empirical_variance: tuple
    bound: tuple
    samples: int
    d: float
    flagged: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.flagged

    def slope(self) -> float:
        """Least-squares slope of variance against ``n``."""
        if len(self.n_grid) < 2:
            return float("nan")
        return float(np.polyfit(np.asarray(self.n_grid, float), np.asarray(self.empirical_variance), 1)[0])


def threshold_estimator(witness, mean_p: float, mean_q: float, g: Graph) -> str:
    """Label ``g`` by which side of the midpoint of the two means it falls.

    The side of the larger mean is closed, so a value exactly at the
    midpoint goes to the model with the larger mean.
    """
    if mean_p == mean_q:
        raise DegenerateMeansError("witness means coincide; the threshold is undefined")
    value = parse_witness(witness)(g)
    mid = 0.5 * (mean_p + mean_q)
    if mean_p > mean_q:
        return P_LABEL if value >= mid else Q_LABEL
    return Q_LABEL if value >= mid else P_LABEL


def _witness_values(w, spec: ModelSpec, seeds, workers: int) -> np.ndarray:
    return np.asarray(map_seeds(lambda s: w(sample_graph(spec, s)), seeds, workers), dtype=float)


def efron_stein_check(witness, spec: ModelSpec, n_grid, samples: int, seed,
                      workers: int = 1) -> VarianceReport:
    """Empirical ``Var f(G_n)`` against the ``d n`` bound, ``d = sup kappa``.

    An ``n`` is flagged when the sample variance exceeds
    ``d n (1 + 5 / sqrt(samples))``.
    """
    w = parse_witness(witness)
    n_grid = tuple(int(n) for n in n_grid)
    variances, bounds, flagged = [], [], []
    slack = 1.0 + 5.0 / math.sqrt(samples)
    for n, ss in zip(n_grid, spawn_seeds(seed, len(n_grid))):
        s = spec.with_(n=n)
        v = _witness_values(w, s, spawn_seeds(ss, samples), workers)
        var = float(v.var(ddof=1))
        bound = s.sup * n
        variances.append(var)
        bounds.append(bound)
        if var > bound * slack:
            flagged.append(n)
    return VarianceReport(w.name, n_grid, tuple(variances), tuple(bounds), samples,
                          spec.sup, tuple(flagged))


def efron_stein_estimate(witness, spec: ModelSpec, samples: int, seed) -> MonteCarloEstimate:
    """Monte Carlo value of ``1/2 sum_i E (f(X) - f(X^(i)))^2``.

    ``X`` lists the ``n`` vertex types and one uniform per vertex pair; the
    graph joins a pair when its uniform falls below the pair's edge
    probability. Each sample resamples every coordinate once. Edge
    coordinates whose resample leaves the edge unchanged contribute zero
    and are skipped without evaluating the witness.
    """
    w = parse_witness(witness)
    n = spec.n
    kernel = spec.kernel()
    prob = kernel.edge_probabilities(n)
    iu, ju = np.triu_indices(n, k=1)
    rng = make_rng(seed)

    def build(x, u):
        b = kernel.block_of(x)
        keep = u < prob[b[iu], b[ju]]
        return Graph._trusted(n, np.stack([iu[keep], ju[keep]], axis=1))

    totals = np.empty(samples)
    for s in range(samples):
        x = rng.random(n)
        u = rng.random(len(iu))
        f0 = w(build(x, u))
        acc = 0.0
        for i in range(n):
            x2 = x.copy()
            x2[i] = rng.random()
            acc += (f0 - w(build(x2, u))) ** 2
        b = kernel.block_of(x)
        p = prob[b[iu], b[ju]]
        u2 = rng.random(len(iu))
        flips = np.flatnonzero((u < p) != (u2 < p))
        for t in flips.tolist():
            v = u.copy()
            v[t] = u2[t]
            acc += (f0 - w(build(x, v))) ** 2
        totals[s] = 0.5 * acc
    return MonteCarloEstimate.from_samples(totals)


def remove_short_cycles(g: Graph, k_max: int, seed=0) -> tuple[Graph, int]:
    """Delete edges until no cycle of length ``<= k_max`` remains.

    Lengths are processed in increasing order. At length ``L`` every
    shorter cycle is already gone, so any surviving L-cycle is a shortest
    cycle; the cycles are visited in seeded random order and one seeded
    random edge is deleted from each that is still intact. Deletions never
    create cycles, so one pass per length suffices.
    """
    k_max = _check_k(k_max)
    rng = make_rng(seed)
    n = g.n
    edits = 0
    for length in range(3, k_max + 1):
        cycles = enumerate_cycles(g, length)
        if len(cycles) == 0:
            continue
        removed = set()
        for c in rng.permutation(len(cycles)).tolist():
            cyc = cycles[c]
            ring = [(min(a, b), max(a, b)) for a, b in zip(cyc.tolist(), np.roll(cyc, -1).tolist())]
            if any(e in removed for e in ring):
                continue
            removed.add(ring[int(rng.integers(length))])
        keys = g.edge_array[:, 0] * n + g.edge_array[:, 1]
        drop = np.isin(keys, [a * n + b for a, b in removed])
        g = g.without_edges(np.flatnonzero(drop))
        edits += len(removed)
    return g, edits


def _resolve_means(w, spec_p, spec_q, means, pilot, seed, workers):
    if means == "closed-form":
        mp, mq = closed_form_mean(w, spec_p), closed_form_mean(w, spec_q)
        if mp is not None and mq is not None and mp != mq:
            return mp, mq
    elif means not in (None, "pilot"):
        mp, mq = means
        return float(mp), float(mq)
    # pilot means from seeds that the trials never use
    sp, sq = spawn_seeds(seed, 2)
    mp = float(_witness_values(w, spec_p, spawn_seeds(sp, pilot), workers).mean())
    mq = float(_witness_values(w, spec_q, spawn_seeds(sq, pilot), workers).mean())
    if mp == mq:
        # identical pilot means (e.g. a constant witness): nudge so the
        # threshold exists; labels then fall to the larger-mean side
        mp = np.nextafter(mp, np.inf)
    return mp, mq


def detection_accuracy(spec_p: ModelSpec, spec_q: ModelSpec, witness, trials: int, seed,
                       means="pilot", pilot: int = 200, adversary_k: int | None = None,
                       workers: int = 1) -> EstimatorResult:
    """Accuracy of the midpoint detector on ``trials`` labelled draws.

    Each trial flips a fair coin, samples from ``spec_p`` on heads and from
    ``spec_q`` on tails, optionally runs :func:`remove_short_cycles` with
    ``k_max = adversary_k`` on the sample, and scores the detector's label.
    ``means`` is ``"pilot"`` (estimated on held-out seeds), ``"closed-form"``
    (falls back to pilot when unavailable or equal) or a ``(mean_p, mean_q)``
    pair.
    """
    w = parse_witness(witness)
    pilot_seed, trial_seed = spawn_seeds(seed, 2)
    mp, mq = _resolve_means(w, spec_p, spec_q, means, pilot, pilot_seed, workers)

    def trial(ss):
        coin, draw, adv = spawn_seeds(ss, 3)
        is_p = bool(make_rng(coin).random() < 0.5)
        g = sample_graph(spec_p if is_p else spec_q, draw)
        edits = 0
        if adversary_k is not None:
            g, edits = remove_short_cycles(g, adversary_k, adv)
        label = threshold_estimator(w, mp, mq, g)
        return (label == P_LABEL) == is_p, edits

    out = map_seeds(trial, spawn_seeds(trial_seed, trials), workers)
    correct = np.array([o[0] for o in out], dtype=float)
    edits = np.array([o[1] for o in out], dtype=float)
    return EstimatorResult(
        accuracy=float(correct.mean()),
        n_trials=int(trials),
        threshold_used=0.5 * (mp + mq),
        witness_name=w.name,
        mean_p=float(mp),
        mean_q=float(mq),
        delta=spec_p.delta,
        n=spec_p.n,
        mean_edits=float(edits.mean()) if adversary_k is not None else None,
    )


def detection_sweep(c: float, delta_grid, n_grid, witness, trials: int, seed,
                    flavor: str = "planted-assortative", means="pilot", pilot: int = 200,
                    workers: int = 1) -> list[EstimatorResult]:
    """Detector accuracy for every ``(delta, n)`` on the grids."""
    delta_grid, n_grid = list(delta_grid), list(n_grid)
    if not delta_grid or not n_grid:
        raise ValueError("delta and n grids must be nonempty")
    rows = []
    seeds = spawn_seeds(seed, len(delta_grid) * len(n_grid))
    for idx, (delta, n) in enumerate((d, n) for d in delta_grid for n in n_grid):
        sp = ModelSpec(n, c, delta, flavor)
        rows.append(detection_accuracy(sp, sp.uniform_twin(), witness, trials, seeds[idx],
                                       means=means, pilot=pilot, workers=workers))
    return rows


def results_to_csv(rows: list[EstimatorResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "n", "accuracy", "se", "threshold", "witness", "trials"])
    for r in rows:
        w.writerow([repr(r.delta), r.n, repr(r.accuracy), repr(r.se), repr(r.threshold_used),
                    r.witness_name, r.n_trials])
    return buf.getvalue()
