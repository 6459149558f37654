"""Linear maximum mean discrepancy as a quadratic form over stacked data.

With samples stacked as columns ``X = [x^s_1 .. x^s_n, x^t_1 .. x^t_m]`` and
``A = W^T W``::

    || mean_i W x^s_i - mean_j W x^t_j ||^2 = tr(A X L X^T)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractError
from .spd import DEFAULT_EPS, SpdMatrix, as_spd, regularize, sharp_mean


@dataclass(frozen=True)
class MmdCoefficients:
    n_source: int
    n_target: int
    matrix: np.ndarray

    @property
    def size(self):
        return self.n_source + self.n_target


class CombineMode(str, Enum):
    ADDITIVE = "additive"
    CASCADED = "cascaded"


def mmd_coefficients(n, m):
    """Block-constant coefficient matrix for ``n`` source and ``m`` target samples."""
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise ContractError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    L = np.full((n + m, n + m), -1.0 / (m * n))
    L[:n, :n] = 1.0 / n**2
    L[n:, n:] = 1.0 / m**2
    L.setflags(write=False)
    return MmdCoefficients(n, m, L)


def stack_columns(source_features, target_features):
    """Stack row-sample matrices into the ``dim x (n+m)`` column layout."""
    Xs = np.asarray(source_features, dtype=float)
    Xt = np.asarray(target_features, dtype=float)
    if Xs.ndim != 2 or Xt.ndim != 2 or Xs.shape[1] != Xt.shape[1]:
        raise ContractError(
            f"source/target feature shapes disagree: {Xs.shape} vs {Xt.shape}"
        )
    return np.vstack([Xs, Xt]).T


def mmd_penalty_matrix(X, L):
    """``X L X^T`` for column-stacked data ``X`` (dim x (n+m))."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != L.size:
        raise ContractError(
            f"X has {X.shape[-1]} columns but L expects {L.size} samples"
        )
    P = X @ L.matrix @ X.T
    return 0.5 * (P + P.T)


def mmd_value(source_features, target_features, A=None):
    """Squared mean discrepancy ``tr(A X L X^T)`` (``A = I`` when omitted)."""
    Xs = np.asarray(source_features, dtype=float)
    Xt = np.asarray(target_features, dtype=float)
    diff = Xs.mean(axis=0) - Xt.mean(axis=0)
    if A is None:
        return float(diff @ diff)
    A = np.asarray(A, dtype=float)
    return float(diff @ A @ diff)


def combined_source_matrix(A_s, X, L, mode, gamma=None, eps=DEFAULT_EPS):
    """Fold a PSD penalty ``X L X^T`` into the source matrix.

    ``additive`` returns ``A_s + X L X^T`` (SPD because ``A_s`` is);
    ``cascaded`` returns ``A_s #_gamma regularize(X L X^T)``.
    """
    return combine_penalty(A_s, mmd_penalty_matrix(X, L), mode, gamma, eps)


def combine_penalty(A_s, penalty, mode, gamma=None, eps=DEFAULT_EPS):
    A_s = as_spd(A_s)
    penalty = np.asarray(penalty, dtype=float)
    if penalty.shape != (A_s.dim, A_s.dim):
        raise ContractError(
            f"penalty shape {penalty.shape} does not match A_s dim {A_s.dim}"
        )
    mode = CombineMode(mode)
    if mode is CombineMode.ADDITIVE:
        return SpdMatrix(A_s.entries + 0.5 * (penalty + penalty.T))
    if gamma is None:
        raise ContractError("cascaded mode requires gamma")
    return sharp_mean(A_s, regularize(penalty, eps), gamma)
