"""Random-walk diffusion on nearest-neighbour graphs of each domain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist, pdist

from .covariance import DomainDataset
from .errors import ContractError, DegenerateSpectrumError, DisconnectedGraphError
from .spd import DEFAULT_EPS, SpdMatrix, as_spd, regularize

LAMBDA_MIN = 1e-6


@dataclass(frozen=True)
class DiffusionSpectrum:
    """Top eigenpairs of ``P = D^{-1} W``, eigenvalues descending.

    ``eigenvectors`` holds right eigenvectors of ``P`` as columns, each
    scaled to unit Euclidean norm.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def num_kept(self):
        return self.eigenvalues.shape[0]


def _rows(data):
    if isinstance(data, DomainDataset):
        return data.features
    return np.asarray(data, dtype=float)


def median_bandwidth(data):
    """Median pairwise Euclidean distance; 1.0 if every point coincides."""
    d = pdist(_rows(data))
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def knn_graph(data, k, bandwidth=None):
    """Symmetric Gaussian-weighted k-nearest-neighbour graph.

    ``W[i, j] = exp(-||x_i - x_j||^2 / (2 b^2))`` when ``j`` is among the
    ``k`` nearest neighbours of ``i`` or the reverse; zero diagonal.
    ``bandwidth=None`` uses the median heuristic.
    """
    X = _rows(data)
    n = X.shape[0]
    k = int(k)
    if not 1 <= k < n:
        raise ContractError(f"k must satisfy 1 <= k < num_samples={n}, got {k}")
    b = median_bandwidth(X) if bandwidth is None else float(bandwidth)
    if b <= 0:
        raise ContractError(f"bandwidth must be positive, got {bandwidth}")
    D2 = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(D2, np.inf)
    # stable sort makes tie-breaking deterministic
    nbrs = np.argsort(D2, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.arange(n)[:, None], nbrs] = True
    mask |= mask.T
    W = np.where(mask, np.exp(-np.where(mask, D2, 0.0) / (2.0 * b * b)), 0.0)
    np.fill_diagonal(W, 0.0)
    return W


def diffusion_spectrum(W, num_kept=None):
    """Leading eigenpairs of the random walk on graph ``W``.

    Solved through the symmetric conjugate ``D^{-1/2} W D^{-1/2}``; its
    eigenvectors map back to random-walk eigenvectors by ``D^{-1/2}``.

    Raises
    ------
    DisconnectedGraphError
        If a vertex has zero degree or the graph has several components.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if W.ndim != 2 or W.shape != (n, n):
        raise ContractError(f"weight matrix must be square, got {W.shape}")
    if np.any(W < 0) or not np.allclose(W, W.T, rtol=0, atol=1e-12):
        raise ContractError("weight matrix must be symmetric and nonnegative")
    deg = W.sum(axis=1)
    zero = np.flatnonzero(deg <= 0)
    if zero.size:
        raise DisconnectedGraphError(
            f"vertex {zero[0]} has zero degree; increase k or the bandwidth"
        )
    ncomp, comp = connected_components(W > 0, directed=False)
    if ncomp > 1:
        raise DisconnectedGraphError(
            f"graph has {ncomp} connected components (vertex 0 in component "
            f"{comp[0]}); increase k to connect the neighbourhood graph"
        )
    if num_kept is None:
        num_kept = min(20, n - 1)
    num_kept = int(num_kept)
    if not 1 <= num_kept <= n:
        raise ContractError(f"num_kept must lie in [1, {n}], got {num_kept}")

    d_isqrt = 1.0 / np.sqrt(deg)
    S = W * d_isqrt[:, None] * d_isqrt[None, :]
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    order = np.argsort(-w, kind="stable")[:num_kept]
    lam = np.clip(w[order], -1.0, 1.0)
    V = U[:, order] * d_isqrt[:, None]
    V /= np.linalg.norm(V, axis=0)
    # sign convention: largest-magnitude entry positive
    idx = np.argmax(np.abs(V), axis=0)
    V *= np.sign(V[idx, np.arange(V.shape[1])])
    return DiffusionSpectrum(lam, V)


def diffusion_kernel(spec, sigma=1.0, eps=DEFAULT_EPS, lambda_min=LAMBDA_MIN):
    """``sum_i exp(-sigma^2 / (2 lambda_i)) v_i v_i^T`` over ``lambda_i > lambda_min``.

    The sum has rank at most ``num_kept`` and is regularized to SPD.
    """
    if sigma < 0:
        raise ContractError(f"sigma must be nonnegative, got {sigma}")
    keep = spec.eigenvalues > lambda_min
    if not np.any(keep):
        raise DegenerateSpectrumError(
            f"no random-walk eigenvalue exceeds {lambda_min:g}"
        )
    lam = spec.eigenvalues[keep]
    V = spec.eigenvectors[:, keep]
    weights = np.exp(-(sigma**2) / (2.0 * lam))
    return regularize((V * weights) @ V.T, eps)


def block_kernel(K_s, K_t):
    """Block-diagonal ``diag(K_s^{-1}, K_t^{-1})``."""
    K_s, K_t = as_spd(K_s), as_spd(K_t)
    n, m = K_s.dim, K_t.dim
    w = np.concatenate([1.0 / K_s.eig.eigenvalues, 1.0 / K_t.eig.eigenvalues])
    V = np.zeros((n + m, n + m))
    V[:n, :n] = K_s.eig.eigenvectors
    V[n:, n:] = K_t.eig.eigenvectors
    return SpdMatrix.from_eig(w, V)


def domain_kernel(data, k=10, bandwidth=None, sigma=1.0, num_kept=None,
                  eps=DEFAULT_EPS):
    """Diffusion kernel of one domain, from raw samples."""
    W = knn_graph(data, k, bandwidth)
    return diffusion_kernel(diffusion_spectrum(W, num_kept), sigma, eps)
