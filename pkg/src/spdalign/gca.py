"""Geometric-mean domain adaptation algorithms.

Every method reduces to one weighted sharp mean ``A = S^{-1} #_t A_t``,
where ``A_t`` is the target pairwise scatter and ``S`` is a source-side
matrix:

=================  ==========================================
GCA1               ``A_s``
GCA2               ``A_s + X L X^T``
Cascaded-GCA2      ``A_s #_gamma X L X^T``
GCA3               ``A_s + X (K + mu L) X^T``
Cascaded-GCA3      ``A_s #_gamma X (K + mu L) X^T``
=================  ==========================================

``L`` is the MMD coefficient matrix and ``K`` the block-diagonal inverse
diffusion kernel of the two domains. At ``t = 1/2`` the result solves
``A S A = A_t`` and source features are adapted as ``x -> A x``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from enum import Enum

import numpy as np

from . import baselines
from .covariance import DomainDataset, pairwise_scatter
from .diffusion import block_kernel, domain_kernel
from .errors import ContractError, DisconnectedGraphError
from .mmd import CombineMode, combine_penalty, mmd_coefficients, mmd_penalty_matrix, stack_columns
from .spd import DEFAULT_EPS, SpdMatrix, as_spd, inverse_sharp_mean, riemannian_distance_sq, spd_pow


class Algorithm(str, Enum):
    NA = "NA"
    CORAL = "CORAL"
    SA = "SA"
    BASELINE_S = "B-S"
    BASELINE_T = "B-T"
    GCA1 = "GCA1"
    GCA2 = "GCA2"
    GCA3 = "GCA3"
    CASCADED_GCA2 = "Cascaded-GCA2"
    CASCADED_GCA3 = "Cascaded-GCA3"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("_", "-")
        aliases = {
            "baseline-s": "b-s", "baselines": "b-s",
            "baseline-t": "b-t", "baselinet": "b-t",
            "cascadedgca2": "cascaded-gca2", "cgca2": "cascaded-gca2",
            "cascadedgca3": "cascaded-gca3", "cgca3": "cascaded-gca3",
        }
        key = aliases.get(key, key)
        for member in cls:
            if member.value.lower() == key:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ContractError(f"unknown method {name!r}; choose from {valid}")

    @property
    def is_spd(self):
        return self.value.upper().startswith(("GCA", "CASCADED"))


@dataclass(frozen=True)
class HyperParams:
    """Hyperparameters shared by all methods.

    ``bandwidth=None`` selects the median-distance heuristic,
    ``num_kept=None`` keeps ``min(20, n - 1)`` diffusion eigenpairs and
    ``subspace_dim=None`` uses ``min(20, dim)`` for the subspace baselines.
    """

    t: float = 0.5
    gamma: float = 0.5
    mu: float = 1.0
    k: int = 10
    bandwidth: float | None = None
    sigma: float = 1.0
    eps: float = DEFAULT_EPS
    num_kept: int | None = None
    subspace_dim: int | None = None

    def __post_init__(self):
        for name in ("t", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ContractError(f"{name} must lie in [0, 1], got {v}")
        if self.mu < 0:
            raise ContractError(f"mu must be nonnegative, got {self.mu}")
        if self.k < 1:
            raise ContractError(f"k must be positive, got {self.k}")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ContractError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.sigma <= 0:
            raise ContractError(f"sigma must be positive, got {self.sigma}")
        if self.eps <= 0:
            raise ContractError(f"eps must be positive, got {self.eps}")

    def as_dict(self):
        return asdict(self)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class AdaptationModel:
    """Learned adaptation: an SPD matrix ``A`` or a baseline linear transform.

    For the SPD family ``source_matrix`` and ``target_matrix`` hold the two
    geodesic endpoints' inputs (``S`` and ``A_t``) and ``source_scatter`` the
    plain ``A_s``; they are kept for diagnostics.
    """

    algorithm: Algorithm
    params: HyperParams
    A: SpdMatrix | None = None
    transform: baselines.LinearTransform | None = None
    source_scatter: SpdMatrix | None = None
    source_matrix: SpdMatrix | None = None
    target_matrix: SpdMatrix | None = None
    penalty: np.ndarray | None = None

    def __post_init__(self):
        if (self.A is None) == (self.transform is None):
            raise ContractError("exactly one of A and transform must be set")

    @property
    def dim(self):
        if self.A is not None:
            return self.A.dim
        return self.transform.input_dim

    def transform_source(self, features):
        return adapt_features(self, features)

    def transform_target(self, features):
        X = _check_dim(features, self.dim)
        if self.A is not None:
            return X.copy()
        return self.transform.apply_target(X)


def _features(data):
    if isinstance(data, DomainDataset):
        return data.features
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ContractError(f"features must be 2-D, got shape {X.shape}")
    return X


def _check_dim(features, dim):
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ContractError(
            f"features of shape {X.shape} do not match model dim {dim}"
        )
    return X


def _scatters(source, target, p):
    Xs, Xt = _features(source), _features(target)
    if Xs.shape[1] != Xt.shape[1]:
        raise ContractError(
            f"source dim {Xs.shape[1]} != target dim {Xt.shape[1]}"
        )
    return Xs, Xt, pairwise_scatter(Xs, p.eps), pairwise_scatter(Xt, p.eps)


def _spd_model(algorithm, p, A_s, S, A_t, penalty=None):
    A = inverse_sharp_mean(S, A_t, p.t)
    return AdaptationModel(
        algorithm, p, A=A, source_scatter=A_s, source_matrix=S,
        target_matrix=A_t, penalty=penalty,
    )


def gca1(source, target, p=HyperParams()):
    """``A = A_s^{-1} #_t A_t``."""
    _, _, A_s, A_t = _scatters(source, target, p)
    return _spd_model(Algorithm.GCA1, p, A_s, A_s, A_t)


def _gca2(source, target, p, mode, algorithm):
    Xs, Xt, A_s, A_t = _scatters(source, target, p)
    X = stack_columns(Xs, Xt)
    P = mmd_penalty_matrix(X, mmd_coefficients(len(Xs), len(Xt)))
    S = combine_penalty(A_s, P, mode, p.gamma, p.eps)
    return _spd_model(algorithm, p, A_s, S, A_t, P)


def gca2(source, target, p=HyperParams()):
    """``A = A_m^{-1} #_t A_t`` with ``A_m = A_s + X L X^T``."""
    return _gca2(source, target, p, CombineMode.ADDITIVE, Algorithm.GCA2)


def cascaded_gca2(source, target, p=HyperParams()):
    """``A = A_m^{-1} #_t A_t`` with ``A_m = A_s #_gamma X L X^T``."""
    return _gca2(source, target, p, CombineMode.CASCADED, Algorithm.CASCADED_GCA2)


def geometry_penalty(source, target, p=HyperParams(), use_kernel=True):
    """``X (K + mu L) X^T`` for row-sample source/target features."""
    Xs, Xt = _features(source), _features(target)
    X = stack_columns(Xs, Xt)
    n, m = len(Xs), len(Xt)
    P = p.mu * mmd_penalty_matrix(X, mmd_coefficients(n, m))
    if use_kernel:
        if min(n, m) <= p.k:
            raise ContractError(
                f"kNN graph needs more than k={p.k} samples per domain "
                f"(source {n}, target {m})"
            )
        try:
            K_s = domain_kernel(Xs, p.k, p.bandwidth, p.sigma, p.num_kept, p.eps)
            K_t = domain_kernel(Xt, p.k, p.bandwidth, p.sigma, p.num_kept, p.eps)
        except DisconnectedGraphError as exc:
            raise DisconnectedGraphError(
                f"{exc} (current k={p.k}; raise k)"
            ) from exc
        K = block_kernel(K_s, K_t)
        XK = X @ K.entries @ X.T
        P = P + 0.5 * (XK + XK.T)
    return P


def _gca3(source, target, p, mode, algorithm, use_kernel):
    Xs, Xt, A_s, A_t = _scatters(source, target, p)
    P = geometry_penalty(Xs, Xt, p, use_kernel)
    S = combine_penalty(A_s, P, mode, p.gamma, p.eps)
    return _spd_model(algorithm, p, A_s, S, A_t, P)


def gca3(source, target, p=HyperParams(), use_kernel=True):
    """``A = A_gs^{-1} #_t A_t`` with ``A_gs = A_s + X (K + mu L) X^T``.

    ``use_kernel=False`` drops ``K`` (ablation).
    """
    return _gca3(source, target, p, CombineMode.ADDITIVE, Algorithm.GCA3, use_kernel)


def cascaded_gca3(source, target, p=HyperParams(), use_kernel=True):
    """``A = A_gs^{-1} #_t A_t`` with ``A_gs = A_s #_gamma X (K + mu L) X^T``."""
    return _gca3(
        source, target, p, CombineMode.CASCADED, Algorithm.CASCADED_GCA3, use_kernel
    )


def _resolve_subspace_dim(p, dim, n, m):
    if p.subspace_dim is not None:
        return p.subspace_dim
    return max(1, min(20, dim, n - 1, m - 1))


def fit(algorithm, source, target, p=HyperParams()):
    """Fit any supported method. ``target`` is used through its features only."""
    algorithm = Algorithm.parse(algorithm)
    Xs, Xt = _features(source), _features(target)
    if Xs.shape[1] != Xt.shape[1]:
        raise ContractError(f"source dim {Xs.shape[1]} != target dim {Xt.shape[1]}")
    dim = Xs.shape[1]
    d = _resolve_subspace_dim(p, dim, len(Xs), len(Xt))
    if algorithm is Algorithm.NA:
        tr = baselines.no_adaptation(dim)
    elif algorithm is Algorithm.CORAL:
        tr = baselines.coral(Xs, Xt, p.eps)
    elif algorithm is Algorithm.SA:
        tr = baselines.subspace_alignment(Xs, Xt, d)
    elif algorithm is Algorithm.BASELINE_S:
        tr = baselines.pca_baseline(Xs, Xt, d, "source_basis")
    elif algorithm is Algorithm.BASELINE_T:
        tr = baselines.pca_baseline(Xs, Xt, d, "target_basis")
    else:
        solver = {
            Algorithm.GCA1: gca1,
            Algorithm.GCA2: gca2,
            Algorithm.GCA3: gca3,
            Algorithm.CASCADED_GCA2: cascaded_gca2,
            Algorithm.CASCADED_GCA3: cascaded_gca3,
        }[algorithm]
        return solver(Xs, Xt, p)
    return AdaptationModel(algorithm, p, transform=tr)


def adapt_features(model, source_features):
    """Map source samples (rows) through the learned model.

    SPD models send ``x -> A x``; baselines apply their own source transform.
    """
    X = _check_dim(source_features, model.dim)
    if model.A is not None:
        return X @ model.A.entries
    return model.transform.apply_source(X)


def objective_omega(A, A_s, A_t):
    """``tr(A A_s) + tr(A^{-1} A_t)``."""
    A = as_spd(A)
    return float(
        np.sum(A.entries * np.asarray(A_s, float))
        + np.sum(spd_pow(A, -1).entries * np.asarray(A_t, float))
    )


def objective_xi(A, A_s, A_t, mmd_penalty):
    """``omega(A) + tr(A X L X^T)``."""
    A = as_spd(A)
    return objective_omega(A, A_s, A_t) + float(np.sum(A.entries * mmd_penalty))


def objective_eta(A, A_s, A_t, geometry_penalty):
    """``omega(A) + tr(A X (K + mu L) X^T)``."""
    return objective_xi(A, A_s, A_t, geometry_penalty)


def objective_gradient(A, A_s, A_t, penalty=None):
    """Euclidean gradient ``A_s + penalty - A^{-1} A_t A^{-1}``."""
    A = as_spd(A)
    Ainv = spd_pow(A, -1).entries
    G = np.asarray(A_s, float) - Ainv @ np.asarray(A_t, float) @ Ainv
    if penalty is not None:
        G = G + np.asarray(penalty, float)
    return G


def weighted_objective(A, source_matrix, A_t, t):
    """``(1 - t) d^2(A, S^{-1}) + t d^2(A, A_t)`` for source-side matrix ``S``."""
    S_inv = spd_pow(source_matrix, -1)
    return (1.0 - t) * riemannian_distance_sq(A, S_inv) + t * riemannian_distance_sq(A, A_t)


def objective_omega_t(A, A_s, A_t, t):
    return weighted_objective(A, A_s, A_t, t)


def objective_xi_t(A, A_s, A_t, mmd_penalty, t):
    return weighted_objective(A, SpdMatrix(np.asarray(A_s, float) + mmd_penalty), A_t, t)


def objective_eta_t(A, A_s, A_t, geometry_penalty, t):
    return weighted_objective(
        A, SpdMatrix(np.asarray(A_s, float) + geometry_penalty), A_t, t
    )
