"""Pseudo-labeling of the unlabeled pool: self-training and label spreading."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .al_strategies import entropy
from .core import HUMAN, PSEUDO, ConfigurationError, ContractError, Dataset, LabeledSet
from .model import CostCounters, Hyper, ModelParams, SoftmaxRegression

TIE_TOL = 1e-12
METHODS = ("self_train_maxconf", "self_train_minentropy", "spread_rbf", "spread_knn")


@dataclass(frozen=True)
class MethodConfig:
    name: str = "spread_rbf"
    sigma: float = 0.1
    k: int = 7
    alpha: float = 0.2
    tol: float = 1e-6
    max_iter: int = 1000
    pseudo_weight: float = 1.0

    def __post_init__(self):
        if self.name not in METHODS:
            raise ConfigurationError(f"unknown SSL method {self.name!r}; expected one of {METHODS}")
        if self.name == "spread_rbf" and not self.sigma > 0:
            raise ConfigurationError("sigma must be > 0")
        if self.name == "spread_knn" and self.k < 1:
            raise ConfigurationError("k must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.pseudo_weight < 0:
            raise ConfigurationError("pseudo_weight must be >= 0")


@dataclass(frozen=True, eq=False)
class AffinityGraph:
    kind: str
    ids: np.ndarray  # vertex order, ascending sample id
    weights: np.ndarray
    sigma: Optional[float] = None
    k: Optional[int] = None


@dataclass
class PseudoLabeling:
    """Pseudo labels for a pool; ``scores`` rows are class distributions in ``ids`` order."""

    ids: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    converged: bool = True
    iterations: int = 0

    def __len__(self):
        return len(self.ids)

    @property
    def assignments(self) -> dict:
        return {int(i): (int(l), s) for i, l, s in zip(self.ids, self.labels, self.scores)}


def self_train(labeled: LabeledSet, pool, dataset: Dataset, hyper: Hyper = Hyper(),
               variant: str = "max_confidence", rng=None,
               counters: Optional[CostCounters] = None, classifier=None,
               pseudo_weight: float = 1.0) -> tuple[ModelParams, PseudoLabeling]:
    """Pseudo-label the pool one sample at a time until it is empty.

    Each round takes the most confident (or lowest-entropy) pool sample under
    the current model, labels it with the model's prediction and retrains,
    warm-starting from the previous weights.
    """
    if len(labeled) == 0:
        raise ContractError("self-training needs a non-empty labeled set")
    if variant not in ("max_confidence", "min_entropy"):
        raise ConfigurationError(f"unknown self-training variant {variant!r}")
    clf = classifier or SoftmaxRegression(hyper)
    work = labeled.copy()
    remaining = sorted(int(i) for i in pool)
    model = clf.train(work, dataset, counters=counters)
    order, labels, scores = [], [], []
    while remaining:
        ids = np.array(remaining)
        probs = clf.predict_proba(model, ids, dataset, counters)
        if variant == "max_confidence":
            k = int(np.argmax(probs.max(axis=1)))
        else:
            k = int(np.argmin(entropy(probs)))
        chosen = int(ids[k])
        label = int(np.argmax(probs[k]))
        work.add(chosen, label, PSEUDO, pseudo_weight)
        remaining.remove(chosen)
        order.append(chosen)
        labels.append(label)
        scores.append(probs[k])
        model = clf.train(work, dataset, init=model, counters=counters)
    if order:
        perm = np.argsort(order)
        result = PseudoLabeling(np.array(order)[perm], np.array(labels)[perm], np.array(scores)[perm])
    else:
        result = PseudoLabeling(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                                np.zeros((0, dataset.num_classes)))
    result.iterations = len(order)
    return model, result


def build_graph(ids, dataset: Dataset, kind: str = "rbf_full", sigma: float = 0.1,
                k: int = 7) -> AffinityGraph:
    """Fully connected RBF graph or union-symmetrized binary kNN graph, zero diagonal."""
    ids = np.sort(np.asarray(list(ids), dtype=np.int64))
    n = ids.size
    if n < 2:
        raise ConfigurationError("a graph needs at least 2 vertices")
    x = dataset.rows(ids)
    sq = cdist(x, x, "sqeuclidean")
    if kind == "rbf_full":
        if not sigma > 0:
            raise ConfigurationError(f"sigma must be > 0, got {sigma}")
        w = np.exp(-sq / (2.0 * sigma * sigma))
        np.fill_diagonal(w, 0.0)
        return AffinityGraph(kind, ids, w, sigma=sigma)
    if kind == "knn":
        if k < 1 or k >= n:
            raise ConfigurationError(f"k must satisfy 1 <= k < {n}, got {k}")
        d = sq.copy()
        np.fill_diagonal(d, np.inf)
        # stable sort: equal distances resolve to the lower id
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        w = np.zeros((n, n))
        w[np.repeat(np.arange(n), k), nearest.ravel()] = 1.0
        w = np.maximum(w, w.T)
        return AffinityGraph(kind, ids, w, k=k)
    raise ConfigurationError(f"unknown graph kind {kind!r}")


def normalized_affinity(weights: np.ndarray) -> np.ndarray:
    """``D^-1/2 W D^-1/2`` with zero rows/columns for zero-degree vertices."""
    deg = weights.sum(axis=1)
    inv = np.zeros_like(deg)
    pos = deg > 0
    inv[pos] = 1.0 / np.sqrt(deg[pos])
    return weights * inv[:, None] * inv[None, :]


def spread_matrix(graph: AffinityGraph, seeds: np.ndarray, alpha: float, tol: float = 1e-6,
                  max_iter: int = 1000) -> tuple[np.ndarray, bool, int]:
    """Iterate ``F <- alpha S F + (1 - alpha) Y`` from ``F = Y``.

    Returns the raw (unnormalized) ``F``, whether the max-norm change fell
    below ``tol``, and the number of iterations performed.
    """
    s = normalized_affinity(graph.weights)
    f = seeds.copy()
    for it in range(1, max_iter + 1):
        nxt = alpha * (s @ f) + (1.0 - alpha) * seeds
        delta = np.max(np.abs(nxt - f)) if f.size else 0.0
        f = nxt
        if delta < tol:
            return f, True, it
    return f, False, max_iter


def label_spread(labeled: LabeledSet, pool, dataset: Dataset, graph: AffinityGraph,
                 alpha: float = 0.2, tol: float = 1e-6, max_iter: int = 1000) -> PseudoLabeling:
    """Propagate human labels over ``graph`` and label every pool vertex.

    Vertices whose propagated row is all zero (including isolated ones) get
    the empirical class distribution of the human labels.
    """
    human = [e for e in labeled if e.provenance == HUMAN]
    if not human:
        raise ContractError("label spreading needs at least one human label")
    pool_ids = np.sort(np.asarray(list(pool), dtype=np.int64))
    pos = {int(v): i for i, v in enumerate(graph.ids)}
    missing = [int(i) for i in pool_ids if int(i) not in pos] + \
              [e.sample_id for e in human if e.sample_id not in pos]
    if missing:
        raise ContractError(f"graph does not contain ids {missing[:5]}")
    C = dataset.num_classes
    y = np.zeros((graph.ids.size, C))
    for e in human:
        y[pos[e.sample_id], e.label] = 1.0
    f, converged, iters = spread_matrix(graph, y, alpha, tol, max_iter)
    if not converged:
        warnings.warn(f"label spreading did not converge in {max_iter} iterations", RuntimeWarning)
    prior = np.bincount([e.label for e in human], minlength=C).astype(float)
    prior /= prior.sum()
    rows = f[[pos[int(i)] for i in pool_ids]] if pool_ids.size else np.zeros((0, C))
    deg = graph.weights.sum(axis=1)[[pos[int(i)] for i in pool_ids]] if pool_ids.size else np.zeros(0)
    sums = rows.sum(axis=1)
    dead = (sums <= 0) | (deg <= 0)
    scores = np.empty_like(rows)
    scores[~dead] = rows[~dead] / sums[~dead, None]
    scores[dead] = prior
    # propagation round-off can split exact ties; treat near-equal scores as tied
    near_top = scores >= scores.max(axis=1, keepdims=True) - TIE_TOL if pool_ids.size else scores
    labels = np.argmax(near_top, axis=1) if pool_ids.size else np.zeros(0, dtype=np.int64)
    return PseudoLabeling(pool_ids, labels, scores, converged, iters)


def pseudo_label(labeled: LabeledSet, pool, dataset: Dataset, method: MethodConfig,
                 rng=None, hyper: Hyper = Hyper(), counters: Optional[CostCounters] = None,
                 classifier=None) -> LabeledSet:
    """Return ``labeled`` extended with pseudo entries for every pool id."""
    pool_ids = [int(i) for i in pool]
    out = labeled.copy()
    if not pool_ids:
        return out
    if method.name.startswith("self_train"):
        variant = "max_confidence" if method.name == "self_train_maxconf" else "min_entropy"
        _, result = self_train(labeled, pool_ids, dataset, hyper, variant, rng, counters,
                               classifier, method.pseudo_weight)
    else:
        ids = np.concatenate([labeled.ids, np.asarray(pool_ids, dtype=np.int64)])
        if method.name == "spread_rbf":
            graph = build_graph(ids, dataset, "rbf_full", sigma=method.sigma)
        else:
            graph = build_graph(ids, dataset, "knn", k=method.k)
        result = label_spread(labeled, pool_ids, dataset, graph, method.alpha, method.tol,
                              method.max_iter)
    for sid, lab in zip(result.ids, result.labels):
        out.add(int(sid), int(lab), PSEUDO, method.pseudo_weight)
    return out
