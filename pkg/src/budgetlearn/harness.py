"""Cross-validated learning-curve experiments and result files."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (NUM_FOLDS, ConfigurationError, ContractError, Dataset, RngStream, make_folds,
                   standardize)
from .diagnostics import KMeansReport, PCAReport
from .model import CostCounters, Hyper, SoftmaxRegression, predict
from .orchestrator import ApproachConfig, RunTrace, run_approach, warm_start


@dataclass(frozen=True)
class CurvePoint:
    num_labels: int
    mean_acc: float
    std_acc: float
    train_count: float
    infer_count: float


@dataclass
class LearningCurve:
    points: list
    approach: str
    name: str
    repeats: int
    seed: int
    traces: dict = field(default_factory=dict)  # (repeat, fold) -> RunTrace, when kept

    @property
    def labels(self) -> np.ndarray:
        return np.array([p.num_labels for p in self.points])

    @property
    def mean(self) -> np.ndarray:
        return np.array([p.mean_acc for p in self.points])

    @property
    def std(self) -> np.ndarray:
        return np.array([p.std_acc for p in self.points])

    def labels_to_reach(self, target: float) -> Optional[int]:
        """Smallest label count whose mean accuracy is at least ``target``."""
        for p in self.points:
            if p.mean_acc >= target:
                return p.num_labels
        return None


def fold_training_sizes(dataset: Dataset, seed: int, repeat: int = 0) -> list[int]:
    folds = make_folds(dataset, RngStream(seed, ("folds", repeat)))
    return [dataset.num_samples - len(f) for f in folds.folds]


def _one_run(args):
    dataset, config, hyper, seed, repeat, fold, keep_trace = args
    folds = make_folds(dataset, RngStream(seed, ("folds", repeat)))
    train_ids, val_ids = folds.round(fold)
    local = standardize(dataset, train_ids)
    stream = RngStream(seed, ("run", repeat, fold))
    state = warm_start(train_ids, local, config.warm_start_count, stream.child("warm"))
    counters = CostCounters()
    trace = run_approach(state, local, config, stream.child("loop").generator(),
                         SoftmaxRegression(hyper), counters)
    # validation scoring is not a cost of the approach; no counters passed
    preds = [predict(p.model, val_ids, local) for p in trace.points]
    costs = [(p.counters.total_train, p.counters.total_infer) for p in trace.points]
    return (repeat, fold, val_ids, [p.num_human_labels for p in trace.points], preds, costs,
            trace if keep_trace else None)


def run_cv_experiment(dataset: Dataset, config: ApproachConfig, repeats: int = 10, seed: int = 0,
                      hyper: Hyper = Hyper(), jobs: int = 1, keep_traces: bool = False) -> LearningCurve:
    """Repeated 5-fold CV of one approach.

    Per repeat, validation predictions of all folds are pooled at each label
    count; the curve reports mean and std of that pooled accuracy over
    repeats, and per-run mean cost counters.
    """
    if not dataset.fully_labeled:
        raise ContractError("the dataset must be fully labeled to act as the annotation oracle")
    if repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    for r in range(repeats):
        config.validate(dataset.num_classes, min(fold_training_sizes(dataset, seed, r)))
    tasks = [(dataset, config, hyper, seed, r, v, keep_traces)
             for r in range(repeats) for v in range(NUM_FOLDS)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_one_run, tasks))
    else:
        results = [_one_run(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))

    grid = config.grid()
    acc = np.zeros((repeats, len(grid)))
    costs = np.zeros((len(grid), 2))
    traces = {}
    for r in range(repeats):
        runs = [res for res in results if res[0] == r]
        for j, n_labels in enumerate(grid):
            pred, truth = [], []
            for _, fold, val_ids, labels, preds, cost, trace in runs:
                if len(labels) <= j or labels[j] != n_labels:
                    raise ContractError(f"run (repeat {r}, fold {fold}) is missing grid point {n_labels}")
                pred.append(preds[j])
                truth.append(dataset.labels[val_ids])
                costs[j] += cost[j]
            acc[r, j] = np.mean(np.concatenate(pred) == np.concatenate(truth))
        for _, fold, *_, trace in runs:
            if trace is not None:
                traces[(r, fold)] = trace
    costs /= repeats * NUM_FOLDS
    points = [CurvePoint(n, float(acc[:, j].mean()), float(acc[:, j].std()), float(costs[j, 0]),
                         float(costs[j, 1])) for j, n in enumerate(grid)]
    return LearningCurve(points, config.approach, config.name, repeats, seed, traces)


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def write_curve(curve: LearningCurve, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["num_labels", "mean_acc", "std_acc", "train_count", "infer_count"])
        for p in curve.points:
            w.writerow([p.num_labels, f"{p.mean_acc:.6f}", f"{p.std_acc:.6f}",
                        f"{p.train_count:.2f}", f"{p.infer_count:.2f}"])
    return path


def write_diagnostics(kmeans: Optional[KMeansReport], pca: Optional[PCAReport], path) -> Path:
    doc = {}
    if kmeans is not None:
        agree = None if np.isnan(kmeans.agreement) else round(kmeans.agreement, 10)
        doc["kmeans"] = {"k": kmeans.k, "agreement": agree,
                         "assignment": [int(a) for a in kmeans.assignment]}
    if pca is not None:
        doc["pca"] = {"explained_variance": [round(float(v), 12) for v in pca.explained_variance],
                      "coords": [[round(float(c), 10) for c in row] for row in pca.coords]}
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def write_pca_coords(pca: PCAReport, dataset: Dataset, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "pc1", "pc2", "class"])
        for i, (a, b) in enumerate(pca.coords[:, :2]):
            lab = "" if dataset.labels is None or dataset.labels[i] < 0 else int(dataset.labels[i])
            w.writerow([i, f"{a:.10f}", f"{b:.10f}", lab])
    return path


def write_selection_trace(trace: RunTrace, pca: PCAReport, dataset: Dataset, path) -> Path:
    """Warm-start rows (order 0) then human selections in order 1, 2, ..."""
    path = Path(path)
    rows = [(0, i) for i in trace.warm_start_ids]
    rows += [(k + 1, i) for k, i in enumerate(trace.selected_ids)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["order", "sample_id", "pc1", "pc2", "class"])
        for order, sid in rows:
            a, b = pca.coords[sid, :2]
            w.writerow([order, sid, f"{a:.10f}", f"{b:.10f}", int(dataset.labels[sid])])
    return path


def emit_results(curves, diagnostics, traces, out_dir, dataset: Optional[Dataset] = None) -> list[Path]:
    """Write curve CSVs, ``diagnostics.json`` and selection-trace CSVs.

    ``diagnostics`` is a ``(KMeansReport, PCAReport)`` pair or None; ``traces``
    maps a run name to a :class:`RunTrace` (needs PCA and ``dataset``).
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for curve in curves:
        written.append(write_curve(curve, out / f"curve_{curve.approach}_{_safe(curve.name)}.csv"))
    kmeans, pca = diagnostics if diagnostics is not None else (None, None)
    if kmeans is not None or pca is not None:
        written.append(write_diagnostics(kmeans, pca, out / "diagnostics.json"))
    if traces:
        if pca is None or dataset is None:
            raise ContractError("selection traces need PCA coordinates and the dataset")
        for run_name, trace in traces.items():
            written.append(write_selection_trace(trace, pca, dataset,
                                                 out / f"selection_trace_{_safe(run_name)}.csv"))
    return written
