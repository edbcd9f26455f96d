"""Datasets, labeled/unlabeled partitions, folds, metrics and seeded randomness."""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

HUMAN = "human"
PSEUDO = "pseudo"
NUM_FOLDS = 5
MISSING_LABEL = -1


class ConfigurationError(ValueError):
    """Invalid experiment or method configuration."""


class ContractError(ValueError):
    """A caller violated an operation's precondition."""


class ParseError(ValueError):
    """Malformed dataset file."""


class NumericError(ArithmeticError):
    """Training produced a non-finite value."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix with optional integer labels.

    Missing labels are stored as ``-1``; ``labels is None`` means the whole
    dataset is unlabeled. ``sample_ids`` are the row indices.
    """

    features: np.ndarray
    labels: Optional[np.ndarray]
    num_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 2 or x.shape[1] < 1 or x.shape[0] < 1:
            raise ContractError(f"features must be a non-empty 2D matrix, got shape {x.shape}")
        object.__setattr__(self, "features", x)
        if self.num_classes < 2:
            raise ContractError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=np.int64)
            if y.shape != (x.shape[0],):
                raise ContractError("labels length must equal the number of rows")
            present = y[y != MISSING_LABEL]
            if present.size and (present.min() < 0 or present.max() >= self.num_classes):
                raise ContractError(f"labels must lie in [0, {self.num_classes})")
            object.__setattr__(self, "labels", y)

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def sample_ids(self) -> np.ndarray:
        return np.arange(self.num_samples)

    def label_of(self, sample_id: int) -> int:
        if self.labels is None or self.labels[sample_id] == MISSING_LABEL:
            raise ContractError(f"sample {sample_id} has no ground-truth label")
        return int(self.labels[sample_id])

    @property
    def fully_labeled(self) -> bool:
        return self.labels is not None and bool(np.all(self.labels != MISSING_LABEL))

    def rows(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.num_samples):
            raise ContractError("unknown sample id")
        return self.features[ids]

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.num_classes)


class Entry(NamedTuple):
    sample_id: int
    label: int
    provenance: str
    weight: float


class LabeledSet:
    """Labeled samples keyed by id, each tagged human or pseudo."""

    def __init__(self, entries: Iterable[Entry] = ()):
        self._entries: dict[int, Entry] = {}
        for e in entries:
            self.add(*e)

    def add(self, sample_id: int, label: int, provenance: str = HUMAN, weight: float = 1.0) -> None:
        sample_id = int(sample_id)
        if sample_id in self._entries:
            raise ContractError(f"sample {sample_id} is already labeled")
        if provenance not in (HUMAN, PSEUDO):
            raise ContractError(f"unknown provenance {provenance!r}")
        if weight < 0:
            raise ContractError("entry weight must be >= 0")
        self._entries[sample_id] = Entry(sample_id, int(label), provenance, float(weight))

    def remove(self, sample_id: int) -> Entry:
        return self._entries.pop(int(sample_id))

    def copy(self) -> "LabeledSet":
        out = LabeledSet()
        out._entries = dict(self._entries)
        return out

    def human(self) -> "LabeledSet":
        return LabeledSet(e for e in self if e.provenance == HUMAN)

    def __contains__(self, sample_id) -> bool:
        return int(sample_id) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Entry]:
        # id order keeps training deterministic regardless of insertion history
        for k in sorted(self._entries):
            yield self._entries[k]

    def __getitem__(self, sample_id) -> Entry:
        return self._entries[int(sample_id)]

    @property
    def ids(self) -> np.ndarray:
        return np.array(sorted(self._entries), dtype=np.int64)

    @property
    def num_human(self) -> int:
        return sum(1 for e in self._entries.values() if e.provenance == HUMAN)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(ids, labels, weights)`` in id order."""
        entries = list(self)
        ids = np.array([e.sample_id for e in entries], dtype=np.int64)
        labels = np.array([e.label for e in entries], dtype=np.int64)
        weights = np.array([e.weight for e in entries], dtype=float)
        return ids, labels, weights


class UnlabeledPool:
    """Ordered collection of unlabeled sample ids."""

    def __init__(self, sample_ids: Iterable[int] = ()):
        self._ids = [int(i) for i in sample_ids]
        if len(set(self._ids)) != len(self._ids):
            raise ContractError("pool ids must be unique")

    def remove(self, sample_id: int) -> None:
        try:
            self._ids.remove(int(sample_id))
        except ValueError:
            raise ContractError(f"sample {sample_id} is not in the pool") from None

    def copy(self) -> "UnlabeledPool":
        return UnlabeledPool(self._ids)

    def __contains__(self, sample_id) -> bool:
        return int(sample_id) in self._ids

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self):
        return iter(self._ids)

    @property
    def ids(self) -> np.ndarray:
        return np.array(self._ids, dtype=np.int64)


@dataclass(frozen=True)
class FoldSplit:
    folds: tuple

    def round(self, validation_fold: int) -> tuple[np.ndarray, np.ndarray]:
        """Training ids (the other folds, sorted) and validation ids for one round."""
        train = np.sort(np.concatenate([f for i, f in enumerate(self.folds) if i != validation_fold]))
        return train, np.sort(self.folds[validation_fold])


def _label_key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode("utf-8"))


@dataclass(frozen=True)
class RngStream:
    """Seeded random stream addressed by a structured label path.

    The generator depends only on ``(seed, stream_label)``, so runs can be
    scheduled in any order and still draw identical numbers.
    """

    seed: int
    stream_label: tuple = ()

    def child(self, *labels) -> "RngStream":
        return RngStream(self.seed, self.stream_label + tuple(labels))

    def generator(self) -> np.random.Generator:
        keys = tuple(_label_key(p) for p in self.stream_label)
        ss = np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=keys)
        return np.random.default_rng(ss)


def load_csv(path, num_classes: Optional[int] = None) -> Dataset:
    """Read the ``f0,...,f{d-1},label`` CSV format; an empty label means unlabeled."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ParseError(f"{path}: header has no 'label' column")
        label_col = header.index("label")
        ncols = len(header)
        feats, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != ncols:
                raise ParseError(f"{path}:{lineno}: expected {ncols} columns, got {len(row)}")
            values = []
            for j, cell in enumerate(row):
                if j == label_col:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: non-numeric feature {cell!r} in column {header[j]!r}") from None
            cell = row[label_col].strip()
            if cell:
                try:
                    lab = int(cell)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: label {cell!r} is not an integer") from None
                if lab < 0 or (num_classes is not None and lab >= num_classes):
                    raise ContractError(f"{path}:{lineno}: label {lab} outside [0, {num_classes})")
            else:
                lab = MISSING_LABEL
            feats.append(values)
            labels.append(lab)
    if not feats:
        raise ParseError(f"{path}: no data rows")
    y = np.array(labels, dtype=np.int64)
    if num_classes is None:
        num_classes = max(2, int(y.max()) + 1) if np.any(y >= 0) else 2
    return Dataset(np.array(feats, dtype=float), None if np.all(y < 0) else y, num_classes)


def save_csv(dataset: Dataset, path) -> None:
    path = Path(path)
    header = [f"f{j}" for j in range(dataset.dim)] + ["label"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(dataset.num_samples):
            lab = "" if dataset.labels is None or dataset.labels[i] < 0 else str(int(dataset.labels[i]))
            w.writerow([repr(float(v)) for v in dataset.features[i]] + [lab])


def make_folds(dataset: Dataset, rng: RngStream, num_folds: int = NUM_FOLDS) -> FoldSplit:
    """Seeded 5-fold split, stratified by class when labels exist.

    Each class's shuffled ids are dealt round-robin, continuing from where the
    previous class stopped, so fold sizes and per-class counts differ by <= 1.
    """
    n = dataset.num_samples
    if n < num_folds:
        raise ConfigurationError(f"need at least {num_folds} samples for {num_folds}-fold CV, got {n}")
    gen = rng.generator()
    if dataset.labels is None:
        order = gen.permutation(n)
    else:
        groups = []
        for cls in np.unique(dataset.labels):
            members = np.flatnonzero(dataset.labels == cls)
            groups.append(members[gen.permutation(members.size)])
        order = np.concatenate(groups)
    assign = np.arange(n) % num_folds
    folds = tuple(np.sort(order[assign == k]) for k in range(num_folds))
    return FoldSplit(folds)


def accuracy(predictions: Sequence[int], truth: Sequence[int]) -> float:
    p = np.asarray(predictions)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ContractError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ContractError("accuracy of an empty prediction vector")
    return float(np.mean(p == t))


def standardize(dataset: Dataset, train_ids) -> Dataset:
    """Z-score every feature with statistics of ``train_ids`` only.

    Zero-variance features are left unchanged.
    """
    ref = dataset.rows(train_ids)
    mean = ref.mean(axis=0)
    std = ref.std(axis=0)
    keep = std == 0
    mean = np.where(keep, 0.0, mean)
    std = np.where(keep, 1.0, std)
    return dataset.with_features((dataset.features - mean) / std)
