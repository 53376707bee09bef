"""Four small classifiers with declared hyperparameter spaces.

All learners are pure numpy, deterministic given their inputs, and expose
the same shape: ``fit(features, labels, hyperparameters) -> predict``.
Default hyperparameters are declared explicitly so a run-them-all baseline
is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..space import Categorical, Configuration, Continuous, Integer, SearchSpace

__all__ = ["Learner", "builtin_learners", "get_learner"]

Predictor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Learner:
    name: str
    space: SearchSpace
    defaults: Configuration
    fit: Callable[[np.ndarray, np.ndarray, Configuration], Predictor]


def _encode(y):
    classes, encoded = np.unique(y, return_inverse=True)
    return classes, encoded


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

def _fit_knn(X, y, hp) -> Predictor:
    k = int(hp["k"])
    Xtr = np.asarray(X, dtype=float)
    classes, y_enc = _encode(y)

    def predict(Xq):
        Xq = np.asarray(Xq, dtype=float)
        d2 = (
            (Xq * Xq).sum(axis=1)[:, None]
            + (Xtr * Xtr).sum(axis=1)[None, :]
            - 2.0 * Xq @ Xtr.T
        )
        kk = min(k, len(Xtr))
        neighbors = np.argpartition(d2, kk - 1, axis=1)[:, :kk]
        votes = np.zeros((len(Xq), len(classes)), dtype=int)
        np.add.at(votes, (np.arange(len(Xq))[:, None], y_enc[neighbors]), 1)
        return classes[votes.argmax(axis=1)]

    return predict


# ---------------------------------------------------------------------------
# Depth-limited decision tree
# ---------------------------------------------------------------------------

def _impurity(counts, criterion):
    # counts: (..., C) class counts per candidate side
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
    if criterion == "gini":
        return 1.0 - (p * p).sum(axis=-1)
    logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=-1)


def _best_split(X, y_enc, n_classes, criterion):
    n = len(y_enc)
    onehot = np.eye(n_classes, dtype=float)[y_enc]
    parent = _impurity(onehot.sum(axis=0), criterion)
    best = None  # (weighted_impurity, feature, threshold)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = left[-1] + onehot[order[-1]] - left
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        nl = np.arange(1, n, dtype=float)
        nr = n - nl
        weighted = (nl * _impurity(left, criterion) + nr * _impurity(right, criterion)) / n
        weighted = np.where(valid, weighted, np.inf)
        i = int(np.argmin(weighted))
        if weighted[i] < parent - 1e-12 and (best is None or weighted[i] < best[0] - 1e-12):
            best = (float(weighted[i]), j, float(0.5 * (xs[i] + xs[i + 1])))
    return best


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self, label, feature=None, threshold=None, left=None, right=None):
        self.label = label
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


def _grow(X, y_enc, n_classes, depth, hp, criterion):
    counts = np.bincount(y_enc, minlength=n_classes)
    node = _TreeNode(label=int(counts.argmax()))
    if depth >= int(hp["max_depth"]) or len(y_enc) < int(hp["min_samples_split"]) or counts.max() == len(y_enc):
        return node
    split = _best_split(X, y_enc, n_classes, criterion)
    if split is None:
        return node
    _, j, threshold = split
    mask = X[:, j] <= threshold
    node.feature, node.threshold = j, threshold
    node.left = _grow(X[mask], y_enc[mask], n_classes, depth + 1, hp, criterion)
    node.right = _grow(X[~mask], y_enc[~mask], n_classes, depth + 1, hp, criterion)
    return node


def _fit_tree(X, y, hp) -> Predictor:
    X = np.asarray(X, dtype=float)
    classes, y_enc = _encode(y)
    criterion = str(hp["criterion"])
    root = _grow(X, y_enc, len(classes), 0, hp, criterion)

    def predict_one(x):
        node = root
        while node.feature is not None:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def predict(Xq):
        Xq = np.asarray(Xq, dtype=float)
        return classes[np.array([predict_one(x) for x in Xq])]

    return predict


# ---------------------------------------------------------------------------
# Logistic regression (softmax batch gradient descent)
# ---------------------------------------------------------------------------

def _fit_logistic(X, y, hp) -> Predictor:
    X = np.asarray(X, dtype=float)
    classes, y_enc = _encode(y)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0.0] = 1.0
    Xb = np.hstack([(X - mu) / sd, np.ones((len(X), 1))])
    n, d = Xb.shape
    C = len(classes)
    Y = np.eye(C)[y_enc]
    W = np.zeros((d, C))
    reg = 0.0 if str(hp["penalty"]) == "none" else 1.0 / float(hp["C"])
    # Fixed step, sized against the curvature bound of the regularized
    # softmax loss on standardized features; zero init keeps fits
    # deterministic.
    lr = 1.0 / (0.5 * d + reg / n)
    for _ in range(int(hp["max_iter"])):
        Z = Xb @ W
        Z -= Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        G = Xb.T @ (P - Y) / n
        if reg:
            G[:-1] += reg * W[:-1] / n
        W -= lr * G

    def predict(Xq):
        Xq = np.asarray(Xq, dtype=float)
        Zq = np.hstack([(Xq - mu) / sd, np.ones((len(Xq), 1))]) @ W
        return classes[Zq.argmax(axis=1)]

    return predict


# ---------------------------------------------------------------------------
# Gaussian naive Bayes
# ---------------------------------------------------------------------------

def _fit_gnb(X, y, hp) -> Predictor:
    X = np.asarray(X, dtype=float)
    classes, y_enc = _encode(y)
    C = len(classes)
    means = np.vstack([X[y_enc == c].mean(axis=0) for c in range(C)])
    variances = np.vstack([X[y_enc == c].var(axis=0) for c in range(C)])
    eps = float(hp["var_smoothing"]) * max(float(X.var(axis=0).max()), 1e-12)
    variances = variances + eps
    priors = np.bincount(y_enc, minlength=C) / len(y_enc)
    log_priors = np.log(priors)

    def predict(Xq):
        Xq = np.asarray(Xq, dtype=float)
        diff = Xq[:, None, :] - means[None, :, :]
        ll = -0.5 * (np.log(2.0 * math.pi * variances)[None] + diff * diff / variances[None]).sum(axis=2)
        return classes[(ll + log_priors).argmax(axis=1)]

    return predict


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def builtin_learners() -> list[Learner]:
    """The four built-in classifiers with their hyperparameter spaces."""
    return [
        Learner(
            name="knn",
            space=SearchSpace({"k": Integer(1, 25)}),
            defaults={"k": 5},
            fit=_fit_knn,
        ),
        Learner(
            name="decision-tree",
            space=SearchSpace({
                "criterion": Categorical(("gini", "entropy")),
                "max_depth": Integer(1, 12),
                "min_samples_split": Integer(2, 21),
            }),
            defaults={"criterion": "gini", "max_depth": 6, "min_samples_split": 2},
            fit=_fit_tree,
        ),
        Learner(
            name="logistic-regression",
            # The no-penalty option stands in for an L1 penalty, which this
            # batch-GD fit does not implement.
            space=SearchSpace({
                "penalty": Categorical(("none", "l2")),
                "C": Continuous(1e-4, 1e4, scale="log"),
                "max_iter": Integer(50, 500),
            }),
            defaults={"penalty": "l2", "C": 1.0, "max_iter": 200},
            fit=_fit_logistic,
        ),
        Learner(
            name="gaussian-nb",
            # Log-scale smoothing domain: the exponent is uniform in [-12, -3].
            space=SearchSpace({"var_smoothing": Continuous(1e-12, 1e-3, scale="log")}),
            defaults={"var_smoothing": 1e-9},
            fit=_fit_gnb,
        ),
    ]


def get_learner(name: str) -> Learner:
    for learner in builtin_learners():
        if learner.name == name:
            return learner
    known = [l.name for l in builtin_learners()]
    raise ValueError(f"unknown learner {name!r}; available: {known}")
