"""Multinomial logistic regression trained by full-batch gradient descent.

Any object with ``train``/``predict_proba`` methods matching
:class:`Classifier` can replace :class:`SoftmaxRegression` in the loops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

import numpy as np
from scipy.special import logsumexp

from .core import ContractError, Dataset, LabeledSet, NumericError, RngStream


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.1
    l2: float = 1e-3
    epochs: int = 200

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ContractError("learning_rate must be > 0")
        if self.l2 < 0:
            raise ContractError("l2 must be >= 0")
        if int(self.epochs) < 1:
            raise ContractError("epochs must be >= 1")


@dataclass(frozen=True, eq=False)
class ModelParams:
    weights: np.ndarray  # C x d
    bias: np.ndarray  # C
    hyper: Hyper = field(default_factory=Hyper)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, num_classes: int, dim: int, hyper: Hyper = Hyper()) -> "ModelParams":
        return cls(np.zeros((num_classes, dim)), np.zeros(num_classes), hyper)

    def same_as(self, other: "ModelParams") -> bool:
        return np.array_equal(self.weights, other.weights) and np.array_equal(self.bias, other.bias)

    def to_json(self) -> str:
        return json.dumps({
            "shape": list(self.weights.shape),
            "weights": self.weights.ravel().tolist(),
            "bias": self.bias.tolist(),
            "hyper": {"learning_rate": self.hyper.learning_rate, "l2": self.hyper.l2,
                      "epochs": self.hyper.epochs},
        })

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        d = json.loads(text)
        w = np.array(d["weights"], dtype=float).reshape(d["shape"])
        return cls(w, np.array(d["bias"], dtype=float), Hyper(**d["hyper"]))


@dataclass
class CostCounters:
    """Model training/inference event counts for one run.

    ``train_count``/``infer_count`` cover the loop's own models; retrains and
    scoring done while evaluating labeling hypotheses (expected-error
    strategies) are tallied separately under ``lookahead_*``.
    """

    train_count: int = 0
    infer_count: int = 0
    lookahead_train_count: int = 0
    lookahead_infer_count: int = 0

    def snapshot(self) -> "CostCounters":
        return replace(self)

    def merge(self, other: "CostCounters") -> None:
        self.train_count += other.train_count
        self.infer_count += other.infer_count
        self.lookahead_train_count += other.lookahead_train_count
        self.lookahead_infer_count += other.lookahead_infer_count

    @property
    def total_train(self) -> int:
        return self.train_count + self.lookahead_train_count

    @property
    def total_infer(self) -> int:
        return self.infer_count + self.lookahead_infer_count

    def as_dict(self) -> dict:
        return {"train_count": self.train_count, "infer_count": self.infer_count,
                "lookahead_train_count": self.lookahead_train_count,
                "lookahead_infer_count": self.lookahead_infer_count}


def loss_and_grad(weights, bias, x, y, sample_weights, l2, num_classes):
    """Weighted mean cross-entropy plus ``l2/2 * ||W||^2`` and its gradient.

    The data term is normalized by the total sample weight, so an entry of
    weight 0 contributes nothing at all.
    """
    logits = x @ weights.T + bias
    lse = logsumexp(logits, axis=1)
    wsum = sample_weights.sum()
    onehot = np.zeros((x.shape[0], num_classes))
    onehot[np.arange(x.shape[0]), y] = 1.0
    if wsum > 0:
        nll = lse - logits[np.arange(x.shape[0]), y]
        data = float(sample_weights @ nll) / wsum
        resid = (np.exp(logits - lse[:, None]) - onehot) * (sample_weights / wsum)[:, None]
    else:
        data = 0.0
        resid = np.zeros_like(onehot)
    loss = data + 0.5 * l2 * float(np.sum(weights * weights))
    grad_w = resid.T @ x + l2 * weights
    grad_b = resid.sum(axis=0)
    return loss, grad_w, grad_b


def train(labeled: LabeledSet, dataset: Dataset, hyper: Hyper = Hyper(),
          init: Optional[ModelParams] = None, rng: Optional[RngStream] = None,
          counters: Optional[CostCounters] = None, epochs: Optional[int] = None) -> ModelParams:
    """Fit weights by gradient descent on the labeled entries.

    Starts from ``init`` when given, otherwise from zeros. ``epochs``
    overrides ``hyper.epochs`` (used for short warm-started retrains).
    ``rng`` is accepted for interface symmetry; full-batch descent draws
    nothing.
    """
    if len(labeled) == 0:
        raise ContractError("cannot train on an empty labeled set")
    n_epochs = hyper.epochs if epochs is None else int(epochs)
    if n_epochs < 1:
        raise ContractError("epochs must be >= 1")
    ids, y, w = labeled.arrays()
    # dropping zero-weight rows keeps the result bit-identical to omitting them
    keep = w > 0
    ids, y, w = ids[keep], y[keep], w[keep]
    x = dataset.rows(ids)
    C, d = dataset.num_classes, dataset.dim
    if init is None:
        W, b = np.zeros((C, d)), np.zeros(C)
    else:
        if init.weights.shape != (C, d):
            raise ContractError(f"init shape {init.weights.shape} does not match dataset ({C}, {d})")
        W, b = init.weights.copy(), init.bias.copy()
    lr = hyper.learning_rate
    for epoch in range(n_epochs):
        loss, gw, gb = loss_and_grad(W, b, x, y, w, hyper.l2, C)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite training loss at epoch {epoch}")
        W -= lr * gw
        b -= lr * gb
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise NumericError(f"non-finite parameters after epoch {n_epochs - 1}")
    if counters is not None:
        counters.train_count += 1
    return ModelParams(W, b, hyper)


def predict_proba(model: ModelParams, sample_ids, dataset: Dataset,
                  counters: Optional[CostCounters] = None) -> np.ndarray:
    """Row-per-sample class distributions (softmax with max subtraction)."""
    if model.weights.shape != (dataset.num_classes, dataset.dim):
        raise ContractError("model shape does not match dataset")
    x = dataset.rows(sample_ids)
    logits = x @ model.weights.T + model.bias
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    if counters is not None:
        counters.infer_count += x.shape[0]
    return p


def predict(model: ModelParams, sample_ids, dataset: Dataset,
            counters: Optional[CostCounters] = None) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class on ties
    return np.argmax(predict_proba(model, sample_ids, dataset, counters), axis=1)


class Classifier(Protocol):
    hyper: Hyper

    def train(self, labeled: LabeledSet, dataset: Dataset, init=None, counters=None,
              epochs=None): ...

    def predict_proba(self, model, sample_ids, dataset: Dataset, counters=None) -> np.ndarray: ...


@dataclass(frozen=True)
class SoftmaxRegression:
    """The built-in :class:`Classifier`."""

    hyper: Hyper = field(default_factory=Hyper)

    def train(self, labeled, dataset, init=None, counters=None, epochs=None):
        return train(labeled, dataset, self.hyper, init=init, counters=counters, epochs=epochs)

    def predict_proba(self, model, sample_ids, dataset, counters=None):
        return predict_proba(model, sample_ids, dataset, counters)
