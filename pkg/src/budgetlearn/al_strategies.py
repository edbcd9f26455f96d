"""Pool-based selection strategies: random, uncertainty and expected error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import entr

from .core import PSEUDO, ContractError, Dataset, LabeledSet, RngStream
from .model import CostCounters, ModelParams, SoftmaxRegression

STRATEGIES = ("random", "least_confident", "entropy", "expected_error", "expected_logloss")


@dataclass(frozen=True)
class SelectionResult:
    selected_id: int
    utility: float
    per_sample_utility: dict


def _pool_ids(pool) -> np.ndarray:
    ids = np.sort(np.asarray(list(pool), dtype=np.int64))
    if ids.size == 0:
        raise ContractError("cannot select from an empty pool")
    return ids


def _pick(ids: np.ndarray, util: np.ndarray, maximize: bool) -> SelectionResult:
    # ids are sorted, and argmax/argmin return the first hit: lowest id wins ties
    k = int(np.argmax(util) if maximize else np.argmin(util))
    return SelectionResult(int(ids[k]), float(util[k]),
                           {int(i): float(u) for i, u in zip(ids, util)})


def least_confidence(probs: np.ndarray) -> np.ndarray:
    return 1.0 - probs.max(axis=-1)


def entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    return entr(probs).sum(axis=-1)


def select_random(pool, rng) -> SelectionResult:
    ids = np.asarray(list(pool), dtype=np.int64)
    if ids.size == 0:
        raise ContractError("cannot select from an empty pool")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    chosen = int(ids[gen.integers(ids.size)])
    return SelectionResult(chosen, 0.0, {int(i): 0.0 for i in ids})


def _score(model, ids, dataset, classifier, counters):
    clf = classifier or SoftmaxRegression(model.hyper)
    return clf.predict_proba(model, ids, dataset, counters)


def select_least_confident(model: ModelParams, pool, dataset: Dataset,
                           counters: Optional[CostCounters] = None, classifier=None) -> SelectionResult:
    ids = _pool_ids(pool)
    return _pick(ids, least_confidence(_score(model, ids, dataset, classifier, counters)), True)


def select_entropy(model: ModelParams, pool, dataset: Dataset,
                   counters: Optional[CostCounters] = None, classifier=None) -> SelectionResult:
    ids = _pool_ids(pool)
    return _pick(ids, entropy(_score(model, ids, dataset, classifier, counters)), True)


def _expected_error(model, labeled, pool, dataset, retrain_budget, error_fn,
                    counters, classifier, include_candidate):
    ids = _pool_ids(pool)
    if len(labeled) == 0:
        raise ContractError("expected-error selection needs a non-empty labeled set")
    clf = classifier or SoftmaxRegression(model.hyper)
    # hypothesis weights come from the current model, before any retraining
    prior = clf.predict_proba(model, ids, dataset, counters)
    look = CostCounters()
    util = np.zeros(ids.size)
    for k, cand in enumerate(ids):
        base = labeled.copy()
        if cand in base:
            base.remove(cand)
        rest = ids if include_candidate else np.delete(ids, k)
        for y in range(dataset.num_classes):
            hyp = base.copy()
            hyp.add(int(cand), y, PSEUDO, 1.0)
            plus = clf.train(hyp, dataset, init=model, counters=look, epochs=retrain_budget)
            if rest.size:
                err = float(error_fn(clf.predict_proba(plus, rest, dataset, look)).sum())
            else:
                err = 0.0
            util[k] += prior[k, y] * err
    if counters is not None:
        counters.lookahead_train_count += look.train_count
        counters.lookahead_infer_count += look.infer_count
    return _pick(ids, util, maximize=False)


def select_min_expected_prediction_error(model: ModelParams, labeled: LabeledSet, pool,
                                         dataset: Dataset, retrain_budget: int = 20,
                                         counters: Optional[CostCounters] = None,
                                         classifier=None, include_candidate: bool = False
                                         ) -> SelectionResult:
    """Pick the sample whose hypothetical labeling minimizes expected 0/1-style error.

    For every candidate and every class, the model is retrained (warm start,
    ``retrain_budget`` epochs) with the candidate labeled as that class, and
    ``sum(1 - max prob)`` over the remaining pool is weighted by the current
    model's probability of that class.
    """
    return _expected_error(model, labeled, pool, dataset, retrain_budget, least_confidence,
                           counters, classifier, include_candidate)


def select_min_expected_logloss_error(model: ModelParams, labeled: LabeledSet, pool,
                                      dataset: Dataset, retrain_budget: int = 20,
                                      counters: Optional[CostCounters] = None,
                                      classifier=None, include_candidate: bool = False
                                      ) -> SelectionResult:
    """As :func:`select_min_expected_prediction_error` with posterior entropy as the error."""
    return _expected_error(model, labeled, pool, dataset, retrain_budget, entropy,
                           counters, classifier, include_candidate)


def select(name: str, *, model=None, labeled=None, pool, dataset, rng=None, retrain_budget=20,
           counters=None, classifier=None, include_candidate=False) -> SelectionResult:
    """Dispatch by strategy name."""
    if name == "random":
        return select_random(pool, rng)
    if name == "least_confident":
        return select_least_confident(model, pool, dataset, counters, classifier)
    if name == "entropy":
        return select_entropy(model, pool, dataset, counters, classifier)
    if name == "expected_error":
        return select_min_expected_prediction_error(model, labeled, pool, dataset, retrain_budget,
                                                    counters, classifier, include_candidate)
    if name == "expected_logloss":
        return select_min_expected_logloss_error(model, labeled, pool, dataset, retrain_budget,
                                                 counters, classifier, include_candidate)
    raise ContractError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")
