"""Standardization and deterministic closed-form classifiers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import DomainDataset
from .errors import ContractError

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def apply(self, data):
        if isinstance(data, DomainDataset):
            return data.with_features(self.apply(data.features))
        return (np.asarray(data, dtype=float) - self.means) / self.stds


def fit_standardizer(data):
    """Per-dimension mean and population std (floored at 1e-12)."""
    X = data.features if isinstance(data, DomainDataset) else np.asarray(data, float)
    return Standardizer(X.mean(axis=0), np.maximum(X.std(axis=0), STD_FLOOR))


def apply_standardizer(s, data):
    return s.apply(data)


class ClassifierKind(str, Enum):
    NEAREST_CLASS_MEAN = "nearest_class_mean"
    LINEAR_ONE_VS_REST = "linear_one_vs_rest"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "_")
        key = {"ncm": "nearest_class_mean", "ridge": "linear_one_vs_rest",
               "linear": "linear_one_vs_rest"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ContractError(f"unknown classifier {name!r}") from None


@dataclass(frozen=True)
class ClassifierModel:
    """Per-class linear scorers; prediction is the argmax score.

    Nearest class mean is stored in the same form: the score
    ``c^T x - ||c||^2 / 2`` ranks classes like ``-||x - c||^2``.
    """

    kind: ClassifierKind
    weights: np.ndarray
    bias: np.ndarray

    @property
    def num_classes(self):
        return self.weights.shape[0]

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.weights.T + self.bias


def _check_training(features, labels, num_classes):
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels).astype(np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ContractError(f"features {X.shape} and labels {y.shape} disagree")
    k = int(y.max()) + 1 if num_classes is None else int(num_classes)
    if k < 2:
        raise ContractError("need at least 2 classes")
    counts = np.bincount(y, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ContractError(f"class {empty[0]} has no training samples")
    return X, y, k


def train(kind, features, labels, reg=1.0, num_classes=None):
    """Fit a nearest-class-mean or ridge one-vs-rest classifier."""
    kind = ClassifierKind.parse(kind)
    if reg < 0:
        raise ContractError(f"reg must be nonnegative, got {reg}")
    X, y, k = _check_training(features, labels, num_classes)
    if kind is ClassifierKind.NEAREST_CLASS_MEAN:
        C = np.stack([X[y == c].mean(axis=0) for c in range(k)])
        return ClassifierModel(kind, C, -0.5 * np.sum(C * C, axis=1))

    # ridge regression on +-1 one-vs-rest targets, intercept via centering
    Y = -np.ones((X.shape[0], k))
    Y[np.arange(X.shape[0]), y] = 1.0
    x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - x_mean, Y - y_mean
    n, d = Xc.shape
    if n < d:
        G = Xc @ Xc.T + reg * np.eye(n)
        W = Xc.T @ np.linalg.lstsq(G, Yc, rcond=None)[0]
    else:
        G = Xc.T @ Xc + reg * np.eye(d)
        W = np.linalg.lstsq(G, Xc.T @ Yc, rcond=None)[0]
    W = W.T
    return ClassifierModel(kind, W, y_mean - W @ x_mean)


def predict(model, features):
    """Argmax class; ties go to the lowest class index."""
    return np.argmax(model.decision_function(features), axis=1)


def accuracy(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ContractError(f"prediction shape {pred.shape} != truth {truth.shape}")
    if pred.size == 0:
        raise ContractError("cannot score an empty prediction")
    return float(np.mean(pred == truth))
