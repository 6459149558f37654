"""Datasets and the second-order statistics built from them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DataError
from .spd import DEFAULT_EPS, regularize


@dataclass(frozen=True)
class DomainDataset:
    """Feature matrix (samples x dims) with optional integer labels.

    Arrays are copied and made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    domain_name: str = ""
    num_classes: int | None = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] < 2:
            raise DataError(f"need at least 2 samples, got {X.shape[0]}")
        if X.shape[1] < 1:
            raise DataError("need at least 1 feature dimension")
        bad = np.argwhere(~np.isfinite(X))
        if bad.size:
            r, c = bad[0]
            raise DataError(f"non-finite feature value at row {r}, column {c}")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)

        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (X.shape[0],):
                raise DataError(
                    f"labels shape {y.shape} does not match {X.shape[0]} samples"
                )
            if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integer valued")
            y = y.astype(np.int64)
            if y.size and y.min() < 0:
                raise DataError("labels must be non-negative")
            k = int(y.max()) + 1 if self.num_classes is None else self.num_classes
            if y.size and y.max() >= k:
                raise DataError(f"label {y.max()} out of range for {k} classes")
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)
            object.__setattr__(self, "num_classes", k)

    @property
    def num_samples(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def without_labels(self):
        """Copy with labels stripped; what adaptation code sees of a target."""
        return DomainDataset(self.features, None, self.domain_name)

    def subset(self, index):
        index = np.asarray(index)
        labels = None if self.labels is None else self.labels[index]
        return DomainDataset(
            self.features[index], labels, self.domain_name, self.num_classes
        )

    def with_features(self, features):
        return DomainDataset(features, self.labels, self.domain_name, self.num_classes)


def _features(data):
    X = data.features if isinstance(data, DomainDataset) else np.asarray(data, float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ContractError(f"need a 2-D array with at least 2 samples, got {X.shape}")
    return X


def _centered_scatter(X):
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc


def pairwise_scatter(data, eps=DEFAULT_EPS):
    """Scatter over all unordered sample pairs, averaged per pair.

    Uses ``sum_{i<j} (x_i - x_j)(x_i - x_j)^T = n * sum_i (x_i - mean)(x_i - mean)^T``
    and divides by the ``n(n-1)/2`` pairs, then regularizes to SPD.
    """
    X = _features(data)
    n = X.shape[0]
    S = _centered_scatter(X) * n / (n * (n - 1) / 2.0)
    return regularize(S, eps)


def empirical_covariance(data, eps=DEFAULT_EPS):
    """Unbiased sample covariance, regularized to SPD."""
    X = _features(data)
    n = X.shape[0]
    return regularize(_centered_scatter(X) / (n - 1), eps)
