"""Comparison methods: no adaptation, CORAL, subspace alignment, PCA."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import DomainDataset, empirical_covariance
from .errors import ContractError
from .spd import DEFAULT_EPS, spd_pow


class TransformKind(str, Enum):
    IDENTITY = "identity"
    CORAL = "coral"
    SUBSPACE_ALIGNMENT = "subspace_alignment"
    PCA_SOURCE = "pca_source"
    PCA_TARGET = "pca_target"


@dataclass(frozen=True)
class LinearTransform:
    """Row-sample maps ``x -> matrix @ x`` for source data.

    ``target_matrix`` is applied to target data; ``None`` leaves target
    features unchanged.
    """

    matrix: np.ndarray
    kind: TransformKind
    target_matrix: np.ndarray | None = None

    def __post_init__(self):
        for M in (self.matrix, self.target_matrix):
            if M is not None and not np.all(np.isfinite(M)):
                raise ContractError("transform has non-finite entries")

    @property
    def input_dim(self):
        return self.matrix.shape[1]

    def apply_source(self, X):
        return np.asarray(X, dtype=float) @ self.matrix.T

    def apply_target(self, X):
        X = np.asarray(X, dtype=float)
        if self.target_matrix is None:
            return X.copy()
        return X @ self.target_matrix.T


def _rows(data):
    return data.features if isinstance(data, DomainDataset) else np.asarray(data, float)


def no_adaptation(dim):
    return LinearTransform(np.eye(int(dim)), TransformKind.IDENTITY)


def coral(source, target, eps=DEFAULT_EPS):
    """Whiten with ``C_s^{-1/2}`` then recolor with ``C_t^{1/2}``.

    The returned ``W`` satisfies ``W C_s W^T = C_t`` for the regularized
    empirical covariances.
    """
    Xs, Xt = _rows(source), _rows(target)
    if Xs.shape[1] != Xt.shape[1]:
        raise ContractError(f"source dim {Xs.shape[1]} != target dim {Xt.shape[1]}")
    return coral_from_covariances(
        empirical_covariance(Xs, eps), empirical_covariance(Xt, eps)
    )


def coral_from_covariances(C_s, C_t):
    W = spd_pow(C_t, 0.5).entries @ spd_pow(C_s, -0.5).entries
    return LinearTransform(W, TransformKind.CORAL)


def pca_basis(data, d):
    """Top-``d`` principal directions as columns (dim x d).

    Each component's largest-magnitude entry is made positive.
    """
    X = _rows(data)
    dim = X.shape[1]
    d = int(d)
    if not 1 <= d <= dim:
        raise ContractError(f"subspace dim must lie in [1, {dim}], got {d}")
    Xc = X - X.mean(axis=0)
    C = Xc.T @ Xc / max(X.shape[0] - 1, 1)
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    order = np.argsort(-w, kind="stable")[:d]
    P = V[:, order]
    idx = np.argmax(np.abs(P), axis=0)
    return P * np.sign(P[idx, np.arange(d)])


def alignment_matrix(P_S, P_T):
    """Minimizer ``P_S^T P_T`` of ``||P_S M - P_T||_F``."""
    return P_S.T @ P_T


def subspace_alignment(source, target, d):
    """Align the source PCA subspace onto the target one.

    Source rows map to ``M^T P_S^T x`` and target rows to ``P_T^T x``.
    """
    Xs, Xt = _rows(source), _rows(target)
    d = int(d)
    limit = min(Xs.shape[1], Xs.shape[0] - 1, Xt.shape[0] - 1)
    if not 1 <= d <= limit:
        raise ContractError(
            f"subspace dim must lie in [1, {limit}] for this data, got {d}"
        )
    P_S, P_T = pca_basis(Xs, d), pca_basis(Xt, d)
    M = alignment_matrix(P_S, P_T)
    return LinearTransform(M.T @ P_S.T, TransformKind.SUBSPACE_ALIGNMENT, P_T.T)


def pca_baseline(source, target, d, which):
    """Project both domains on one domain's top-``d`` PCA basis."""
    if which == "source_basis":
        P, kind = pca_basis(source, d), TransformKind.PCA_SOURCE
    elif which == "target_basis":
        P, kind = pca_basis(target, d), TransformKind.PCA_TARGET
    else:
        raise ContractError(f"which must be 'source_basis' or 'target_basis', got {which!r}")
    return LinearTransform(P.T, kind, P.T)
