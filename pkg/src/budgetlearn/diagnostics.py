"""Clusterability and projection diagnostics: k-means agreement and 2D PCA."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import ConfigurationError, Dataset, RngStream


@dataclass(frozen=True, eq=False)
class KMeansReport:
    k: int
    assignment: np.ndarray
    agreement: float
    inertia: float


@dataclass(frozen=True, eq=False)
class PCAReport:
    coords: np.ndarray  # n x 2
    explained_variance: np.ndarray  # 2 fractions of total variance
    components: np.ndarray  # 2 x d


def _kmeanspp(x, k, gen):
    n = x.shape[0]
    centers = [x[gen.integers(n)]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        # coincident points: fall back to a uniform pick
        idx = gen.choice(n, p=d2 / total) if total > 0 else gen.integers(n)
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers)


def _lloyd(x, centers, max_iter=300, tol=1e-10):
    for _ in range(max_iter):
        d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d, axis=1)
        new = centers.copy()
        for j in range(centers.shape[0]):
            members = x[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = np.max(np.abs(new - centers))
        centers = new
        if shift <= tol:
            break
    d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = np.argmin(d, axis=1)
    return assign, float(d[np.arange(x.shape[0]), assign].sum())


def kmeans(x: np.ndarray, k: int, rng, restarts: int = 10) -> tuple[np.ndarray, float]:
    """Lloyd's algorithm from k-means++ seeds; best of ``restarts`` by inertia."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    best = None
    for _ in range(restarts):
        assign, inertia = _lloyd(x, _kmeanspp(x, k, gen))
        if best is None or inertia < best[1]:
            best = (assign, inertia)
    return best


def cluster_agreement(assignment, labels, k: int, num_classes: int) -> float:
    """Fraction of samples matched under the best one-to-one cluster/class pairing."""
    assignment = np.asarray(assignment)
    labels = np.asarray(labels)
    table = np.zeros((k, num_classes), dtype=np.int64)
    np.add.at(table, (assignment, labels), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / labels.size)


def kmeans_diagnose(dataset: Dataset, k: int, rng, restarts: int = 10) -> KMeansReport:
    if k < 2:
        raise ConfigurationError("k must be >= 2")
    if k > dataset.num_samples:
        raise ConfigurationError(f"k={k} exceeds the {dataset.num_samples} samples")
    assign, inertia = kmeans(dataset.features, k, rng, restarts)
    agree = float("nan")
    if dataset.fully_labeled:
        agree = cluster_agreement(assign, dataset.labels, k, dataset.num_classes)
    return KMeansReport(k, assign, agree, inertia)


def _power_iteration(x, start, tol=1e-10, max_iter=100000):
    """Leading eigenpair of ``x.T @ x`` without forming the matrix."""
    v = start / np.linalg.norm(start)
    lam = 0.0
    for _ in range(max_iter):
        w = x.T @ (x @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            return v, 0.0
        w /= norm
        if np.linalg.norm(w - v) < tol:
            v = w
            lam = norm
            break
        v, lam = w, norm
    return v, float(v @ (x.T @ (x @ v)))


def pca_project(dataset: Dataset, n_components: int = 2) -> PCAReport:
    """Project onto the top principal components via power iteration with deflation.

    Each component's largest-magnitude loading is made positive.
    """
    x = dataset.features
    n, d = x.shape
    if n < 3 or d < 2:
        raise ConfigurationError("PCA needs at least 3 samples and 2 features")
    xc = x - x.mean(axis=0)
    total = float(np.sum(xc * xc))
    if total == 0:
        return PCAReport(np.zeros((n, n_components)), np.zeros(n_components),
                         np.zeros((n_components, d)))
    start_gen = np.random.default_rng(12345)
    comps, lams = [], []
    resid = xc.copy()
    for _ in range(n_components):
        v, lam = _power_iteration(resid, start_gen.standard_normal(d))
        if lam <= 1e-12 * total:
            v, lam = np.zeros(d), 0.0
        else:
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            resid = resid - np.outer(resid @ v, v)
        comps.append(v)
        lams.append(max(lam, 0.0))
    comps = np.array(comps)
    return PCAReport(xc @ comps.T, np.array(lams) / total, comps)
