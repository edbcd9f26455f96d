"""Passive, active, semi-supervised and hybrid annotation loops."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import al_strategies
from .core import HUMAN, ConfigurationError, ContractError, Dataset, LabeledSet, RngStream, UnlabeledPool
from .model import CostCounters, Hyper, ModelParams, SoftmaxRegression
from .ssl_methods import MethodConfig, pseudo_label

APPROACHES = ("passive", "active", "ssl", "hybrid")


@dataclass(frozen=True)
class ApproachConfig:
    approach: str = "passive"
    al_strategy: Optional[str] = None
    ssl_method: Optional[MethodConfig] = None
    warm_start_count: int = 40
    final_count: int = 90
    eval_grid_step: int = 5
    retrain_budget: int = 20
    include_candidate: bool = False

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ConfigurationError(f"unknown approach {self.approach!r}; expected one of {APPROACHES}")
        if self.approach in ("active", "hybrid") and self.al_strategy is None:
            raise ConfigurationError(f"approach {self.approach!r} requires al_strategy")
        if self.al_strategy is not None and self.al_strategy not in al_strategies.STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.al_strategy!r}")
        if self.approach in ("ssl", "hybrid") and self.ssl_method is None:
            raise ConfigurationError(f"approach {self.approach!r} requires ssl_method")
        if self.eval_grid_step < 1:
            raise ConfigurationError("eval_grid_step must be >= 1")
        if self.retrain_budget < 1:
            raise ConfigurationError("retrain_budget must be >= 1")
        if self.final_count < self.warm_start_count:
            raise ConfigurationError(
                f"final_count F={self.final_count} is below warm_start_count B={self.warm_start_count}")

    @property
    def name(self) -> str:
        """Strategy/method label used in output file names."""
        if self.approach == "passive":
            return "random"
        if self.approach == "active":
            return self.al_strategy
        if self.approach == "ssl":
            return self.ssl_method.name
        return f"{self.al_strategy}+{self.ssl_method.name}"

    def grid(self) -> list[int]:
        b, f = self.warm_start_count, self.final_count
        pts = list(range(b, f + 1, self.eval_grid_step))
        if pts[-1] != f:
            pts.append(f)
        return pts

    def validate(self, num_classes: int, train_size: int) -> None:
        b, f = self.warm_start_count, self.final_count
        if b < num_classes:
            raise ConfigurationError(f"warm_start_count B={b} is below the class count C={num_classes}")
        if f > train_size:
            raise ConfigurationError(f"final_count F={f} exceeds the fold training size T={train_size}")


@dataclass(frozen=True, eq=False)
class TracePoint:
    num_human_labels: int
    model: ModelParams
    counters: CostCounters
    selected_ids: tuple


@dataclass
class RunTrace:
    warm_start_ids: tuple
    points: list = field(default_factory=list)
    status: str = "complete"

    @property
    def selected_ids(self) -> tuple:
        return self.points[-1].selected_ids if self.points else ()

    def to_json(self) -> str:
        """Canonical serialization; equal traces give equal strings."""
        return json.dumps({
            "warm_start_ids": list(self.warm_start_ids),
            "status": self.status,
            "points": [{
                "num_human_labels": p.num_human_labels,
                "weights": p.model.weights.ravel().tolist(),
                "bias": p.model.bias.tolist(),
                "counters": p.counters.as_dict(),
                "selected_ids": list(p.selected_ids),
            } for p in self.points],
        })


@dataclass
class RunState:
    labeled: LabeledSet
    pool: UnlabeledPool

    def copy(self) -> "RunState":
        return RunState(self.labeled.copy(), self.pool.copy())

    def annotate(self, sample_id: int, dataset: Dataset) -> None:
        """Move ``sample_id`` from the pool to the labeled set with its true label."""
        self.pool.remove(sample_id)
        self.labeled.add(sample_id, dataset.label_of(sample_id), HUMAN, 1.0)


def warm_start(training_ids, dataset: Dataset, count: int, rng) -> RunState:
    ids = np.sort(np.asarray(training_ids, dtype=np.int64))
    if count > ids.size:
        raise ConfigurationError(f"warm-start count B={count} exceeds the {ids.size} training ids")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    chosen = np.sort(gen.choice(ids, size=count, replace=False)) if count else np.zeros(0, dtype=np.int64)
    picked = set(int(i) for i in chosen)
    labeled = LabeledSet()
    for i in chosen:
        labeled.add(int(i), dataset.label_of(int(i)), HUMAN, 1.0)
    return RunState(labeled, UnlabeledPool(i for i in ids if int(i) not in picked))


def _generator(rng):
    return rng.generator() if isinstance(rng, RngStream) else rng


def _run(state: RunState, dataset: Dataset, config: ApproachConfig, rng, classifier,
         counters: Optional[CostCounters], fit, choose, fit_every_step: bool) -> RunTrace:
    """Shared annotation loop.

    At each label count ``l`` from B upward: fit a model (every step, or only
    on grid points), record it on grid points, stop at F, else pick one pool
    sample and annotate it. The fit at ``l == B`` is the warm-start training
    and is not charged to ``counters``.
    """
    state = state.copy()
    counters = counters if counters is not None else CostCounters()
    gen = _generator(rng)
    grid = set(config.grid())
    trace = RunTrace(tuple(int(i) for i in state.labeled.human().ids))
    selected: list[int] = []
    b, f = config.warm_start_count, config.final_count
    if state.labeled.num_human != b:
        raise ContractError(f"state has {state.labeled.num_human} human labels, expected B={b}")
    model = None
    l = b
    while True:
        if fit_every_step or l in grid:
            charge = counters if l > b else CostCounters()
            model = fit(state, charge, counters)
        if l in grid:
            trace.points.append(TracePoint(l, model, counters.snapshot(), tuple(selected)))
        if l >= f:
            break
        if len(state.pool) == 0:
            trace.status = "pool_exhausted"
            break
        chosen = choose(state, model, gen, counters)
        state.annotate(chosen, dataset)
        selected.append(chosen)
        l += 1
    return trace


def _fit_human(dataset, classifier):
    def fit(state, charge, counters):
        return classifier.train(state.labeled.human(), dataset, counters=charge)
    return fit


def _fit_augmented(dataset, config, classifier, rng):
    def fit(state, charge, counters):
        human = state.labeled.human()
        augmented = pseudo_label(human, state.pool, dataset, config.ssl_method, rng,
                                 classifier.hyper, counters, classifier)
        return classifier.train(augmented, dataset, counters=charge)
    return fit


def _choose_random(state, model, gen, counters):
    return al_strategies.select_random(state.pool, gen).selected_id


def _choose_strategy(dataset, config, classifier):
    def choose(state, model, gen, counters):
        return al_strategies.select(
            config.al_strategy, model=model, labeled=state.labeled.human(), pool=state.pool,
            dataset=dataset, rng=gen, retrain_budget=config.retrain_budget, counters=counters,
            classifier=classifier, include_candidate=config.include_candidate).selected_id
    return choose


def _classifier(classifier, hyper):
    return classifier if classifier is not None else SoftmaxRegression(hyper or Hyper())


def run_passive(state: RunState, dataset: Dataset, config: ApproachConfig, rng,
                classifier=None, counters=None, hyper=None) -> RunTrace:
    """Random annotation; the model trains on human labels after every step."""
    clf = _classifier(classifier, hyper)
    return _run(state, dataset, config, rng, clf, counters, _fit_human(dataset, clf),
                _choose_random, fit_every_step=True)


def run_active(state: RunState, dataset: Dataset, config: ApproachConfig, rng,
               classifier=None, counters=None, hyper=None) -> RunTrace:
    """Train on human labels, let the strategy pick x*, annotate it, repeat."""
    clf = _classifier(classifier, hyper)
    return _run(state, dataset, config, rng, clf, counters, _fit_human(dataset, clf),
                _choose_strategy(dataset, config, clf), fit_every_step=True)


def run_ssl(state: RunState, dataset: Dataset, config: ApproachConfig, rng,
            classifier=None, counters=None, hyper=None) -> RunTrace:
    """Random annotation; at grid points, pseudo-label the pool afresh and train on all."""
    clf = _classifier(classifier, hyper)
    return _run(state, dataset, config, rng, clf, counters,
                _fit_augmented(dataset, config, clf, rng), _choose_random, fit_every_step=False)


def run_hybrid(state: RunState, dataset: Dataset, config: ApproachConfig, rng,
               classifier=None, counters=None, hyper=None) -> RunTrace:
    """Each step: pseudo-label the pool, train on human + pseudo, select x* with AL, annotate."""
    clf = _classifier(classifier, hyper)
    return _run(state, dataset, config, rng, clf, counters,
                _fit_augmented(dataset, config, clf, rng),
                _choose_strategy(dataset, config, clf), fit_every_step=True)


RUNNERS = {"passive": run_passive, "active": run_active, "ssl": run_ssl, "hybrid": run_hybrid}


def run_approach(state, dataset, config: ApproachConfig, rng, classifier=None, counters=None,
                 hyper=None) -> RunTrace:
    return RUNNERS[config.approach](state, dataset, config, rng, classifier, counters, hyper)
