"""Datasets, cross-validation, and the balanced-accuracy reward."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..evaluator import Evaluable
from ..space import Configuration

__all__ = [
    "Dataset",
    "CvSpec",
    "kfold_split",
    "stratified_kfold",
    "balanced_accuracy",
    "cv_reward",
    "cv_evaluable",
    "select_best_baseline",
    "make_dataset",
    "load_csv",
]


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus class labels; immutable and shareable."""

    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if features.ndim != 2 or len(features) == 0:
            raise ValueError("features must be a non-empty n x d matrix")
        if len(labels) != len(features):
            raise ValueError("labels length must match the number of rows")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must not contain missing or non-finite values")
        if len(np.unique(labels)) < 2:
            raise ValueError("classification datasets need at least two classes")

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class CvSpec:
    """K-fold cross-validation with a seeded shuffle."""

    folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"cross-validation needs at least 2 folds, got {self.folds}")


def kfold_split(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Partition {0..n-1} into K disjoint index sets of near-equal size."""
    if not 2 <= folds <= n:
        raise ValueError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, folds)]


def stratified_kfold(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Per-class round-robin assignment after a seeded shuffle.

    Keeps class proportions close to uniform across folds, which stabilizes
    balanced accuracy on small validation folds.
    """
    labels = np.asarray(labels)
    if not 2 <= folds <= len(labels):
        raise ValueError(f"need 2 <= folds <= n, got folds={folds}, n={len(labels)}")
    rng = np.random.default_rng(seed)
    assigned: list[list[int]] = [[] for _ in range(folds)]
    cursor = 0
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        for j in idx:
            assigned[cursor % folds].append(int(j))
            cursor += 1
    return [np.sort(np.array(fold, dtype=int)) for fold in assigned]


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean per-class recall over the classes present in y_true."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred must have equal length")
    if len(y_true) == 0:
        raise ValueError("balanced_accuracy requires at least one sample")
    recalls = []
    for cls in np.unique(y_true):
        mask = y_true == cls
        recalls.append(float(np.mean(y_pred[mask] == cls)))
    return float(np.mean(recalls))


def cv_reward(learner, hp: Configuration, dataset: Dataset, cv: CvSpec) -> float:
    """Mean held-out balanced accuracy over stratified folds.

    Training always happens on the complement of the validation fold, so the
    reward is intrinsically in [0, 1]. Learner failures propagate to the
    caller (the evaluator records them as failed evaluations).
    """
    folds = stratified_kfold(dataset.labels, cv.folds, cv.seed)
    all_idx = np.arange(len(dataset))
    scores = []
    for fold in folds:
        train_idx = np.setdiff1d(all_idx, fold, assume_unique=True)
        predictor = learner.fit(dataset.features[train_idx], dataset.labels[train_idx], hp)
        scores.append(balanced_accuracy(dataset.labels[fold], predictor(dataset.features[fold])))
    return float(np.mean(scores))


def cv_evaluable(learner, dataset: Dataset, cv: CvSpec) -> Evaluable:
    """Wrap a learner as an evaluable objective over its hyperparameter space."""
    return Evaluable(
        fn=lambda hp: cv_reward(learner, hp, dataset, cv),
        low=0.0,
        high=1.0,
        orientation="maximize",
        name=learner.name,
    )


def select_best_baseline(learners, dataset: Dataset, cv: CvSpec) -> tuple[str, float]:
    """Evaluate every learner once with its default hyperparameters and keep
    the best; ties go to the earlier learner."""
    best_name, best_reward = None, -1.0
    for learner in learners:
        reward = cv_reward(learner, learner.defaults, dataset, cv)
        if reward > best_reward:
            best_name, best_reward = learner.name, reward
    return best_name, best_reward


# ---------------------------------------------------------------------------
# Built-in generators and CSV loading
# ---------------------------------------------------------------------------

def _two_clusters(n, rng, separation=6.0, noise=1.0):
    half = n // 2
    counts = [half, n - half]
    centers = [(-separation / 2.0, 0.0), (separation / 2.0, 0.0)]
    X = np.vstack([rng.normal(c, noise, size=(m, 2)) for c, m in zip(centers, counts)])
    y = np.repeat([0, 1], counts)
    return X, y


def _xor(n, rng, scale=1.0, noise=0.45):
    quarter, rem = divmod(n, 4)
    counts = [quarter + (1 if i < rem else 0) for i in range(4)]
    corners = [(-scale, -scale), (-scale, scale), (scale, -scale), (scale, scale)]
    X = np.vstack([rng.normal(c, noise, size=(m, 2)) for c, m in zip(corners, counts)])
    y = np.concatenate([np.full(m, int(cx * cy < 0)) for (cx, cy), m in zip(corners, counts)])
    return X, y


def _rings(n, rng, inner=1.0, outer=2.0, noise=0.25):
    half = n // 2
    counts = [half, n - half]
    radii = [inner, outer]
    parts, labels = [], []
    for cls, (r, m) in enumerate(zip(radii, counts)):
        theta = rng.uniform(0.0, 2.0 * np.pi, m)
        rr = r + rng.normal(0.0, noise, m)
        parts.append(np.column_stack([rr * np.cos(theta), rr * np.sin(theta)]))
        labels.append(np.full(m, cls))
    return np.vstack(parts), np.concatenate(labels)


_GENERATORS = {
    "two-clusters": _two_clusters,
    "xor": _xor,
    "rings": _rings,
}


def make_dataset(name: str, n: int, seed: int, **params) -> Dataset:
    """Generate one of the named built-in datasets ("two-clusters", "xor",
    "rings") with a seeded shuffle of the rows."""
    if name not in _GENERATORS:
        raise ValueError(f"unknown dataset {name!r}; available: {sorted(_GENERATORS)}")
    if n < 4:
        raise ValueError(f"need n >= 4 samples, got {n}")
    rng = np.random.default_rng(seed)
    X, y = _GENERATORS[name](n, rng, **params)
    perm = rng.permutation(len(y))
    return Dataset(features=X[perm], labels=y[perm], name=name)


def load_csv(path, name: str = "") -> Dataset:
    """Load a headerless CSV: numeric feature columns, last column = label."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append(row)
    if not rows:
        raise ValueError(f"empty dataset file: {path}")
    try:
        features = np.array([[float(v) for v in row[:-1]] for row in rows])
    except ValueError as exc:
        raise ValueError(f"non-numeric feature value in {path}: {exc}") from None
    labels = np.array([row[-1] for row in rows])
    return Dataset(features=features, labels=labels, name=name or path.stem)
