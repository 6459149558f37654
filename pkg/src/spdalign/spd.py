"""Linear algebra on the manifold of symmetric positive definite matrices.

Every matrix function here goes through a symmetric eigendecomposition.
The affine-invariant geometry gives closed forms for the geodesic between
two SPD matrices

    X #_t Y = X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2},

for the Riccati equation ``A S A = T`` (solved by ``S^{-1} #_{1/2} T``) and
for the squared Riemannian distance ``||log(Y^{-1/2} X Y^{-1/2})||_F^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (
    ContractError,
    IllConditionedError,
    NotPositiveDefiniteError,
    NumericalError,
)

SYM_TOL = 1e-9
COND_MAX = 1e12
DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition ``V diag(w) V^T`` with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        w = self.eigenvalues if values is None else values
        V = self.eigenvectors
        out = (V * w) @ V.T
        return 0.5 * (out + out.T)


def _readonly(a):
    a.setflags(write=False)
    return a


def _symmetrize_checked(M, sym_tol):
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        raise ContractError("matrix must have dim >= 1")
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    scale = np.max(np.abs(M))
    asym = np.max(np.abs(M - M.T))
    if asym > sym_tol * scale:
        raise ContractError(
            f"matrix is not symmetric: max|M - M^T| = {asym:.3e} "
            f"> {sym_tol:g} * max|M| = {sym_tol * scale:.3e}"
        )
    return 0.5 * (M + M.T)


def sym_eig(M):
    """Eigendecomposition of a symmetric matrix (symmetrized first)."""
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        try:
            cond = np.linalg.cond(M)
        except np.linalg.LinAlgError:
            cond = float("inf")
        raise NumericalError(
            f"symmetric eigendecomposition did not converge (cond={cond:.3e})"
        ) from exc
    return SymEig(w, V)


class SpdMatrix:
    """Immutable dense SPD matrix with a certified positive spectrum.

    Construction symmetrizes the input, computes its eigendecomposition and
    rejects it unless every eigenvalue is strictly positive. The
    decomposition is kept, so fractional powers cost one matrix product.
    PSD inputs must be promoted explicitly with :func:`regularize`.
    """

    __slots__ = ("_entries", "_eig")

    def __init__(self, entries, *, sym_tol=SYM_TOL):
        M = _symmetrize_checked(entries, sym_tol)
        eig = sym_eig(M)
        if eig.eigenvalues[0] <= 0:
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite: min eigenvalue "
                f"{eig.eigenvalues[0]:.3e}; use regularize() to promote PSD input"
            )
        self._entries = _readonly(M)
        self._eig = SymEig(_readonly(eig.eigenvalues), _readonly(eig.eigenvectors))

    @classmethod
    def from_eig(cls, eigenvalues, eigenvectors):
        """Build from a known eigendecomposition without re-factorizing."""
        w = np.asarray(eigenvalues, dtype=float)
        V = np.asarray(eigenvectors, dtype=float)
        if not np.all(np.isfinite(w)) or np.min(w) <= 0:
            raise NotPositiveDefiniteError(
                f"eigenvalues must be finite and positive, min is {np.min(w):.3e}"
            )
        order = np.argsort(w, kind="stable")
        w, V = w[order], V[:, order]
        obj = cls.__new__(cls)
        obj._eig = SymEig(_readonly(w.copy()), _readonly(V.copy()))
        obj._entries = _readonly(obj._eig.reconstruct())
        return obj

    @property
    def entries(self):
        return self._entries

    @property
    def dim(self):
        return self._entries.shape[0]

    @property
    def eig(self):
        return self._eig

    @property
    def cond(self):
        w = self._eig.eigenvalues
        return float(w[-1] / w[0])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries.copy()
        return self._entries.astype(dtype)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim}, cond={self.cond:.3e})"

    def inv(self):
        return spd_pow(self, -1.0)

    def sqrt(self):
        return spd_pow(self, 0.5)


def as_spd(M):
    """Return ``M`` as an :class:`SpdMatrix`, certifying it if needed."""
    if isinstance(M, SpdMatrix):
        return M
    return SpdMatrix(M)


def _same_dim(X, Y):
    if X.dim != Y.dim:
        raise ContractError(f"dimension mismatch: {X.dim} vs {Y.dim}")


def spd_pow(M, p):
    """Real power ``V diag(w**p) V^T`` of an SPD matrix."""
    M = as_spd(M)
    w, V = M.eig.eigenvalues, M.eig.eigenvectors
    return SpdMatrix.from_eig(w ** float(p), V)


def _half_powers(M):
    w, V = M.eig.eigenvalues, M.eig.eigenvectors
    s = np.sqrt(w)
    return (V * s) @ V.T, (V / s) @ V.T


def _congruence_power(outer, inner_factor, Y, t):
    # outer @ (inner_factor @ Y @ inner_factor)^t @ outer
    inner = inner_factor @ Y.entries @ inner_factor
    P = spd_pow(SpdMatrix(0.5 * (inner + inner.T)), t)
    out = outer @ P.entries @ outer
    return SpdMatrix(0.5 * (out + out.T))


def _check_weight(t):
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ContractError(f"geodesic weight must lie in [0, 1], got {t}")
    return t


def sharp_mean(X, Y, t):
    """Point at parameter ``t`` on the geodesic from ``X`` to ``Y``.

    ``t = 0`` gives ``X``, ``t = 1`` gives ``Y`` and ``t = 1/2`` the
    matrix geometric mean.
    """
    X, Y = as_spd(X), as_spd(Y)
    _same_dim(X, Y)
    t = _check_weight(t)
    half, inv_half = _half_powers(X)
    return _congruence_power(half, inv_half, Y, t)


def inverse_sharp_mean(S, Y, t):
    """``S^{-1} #_t Y`` evaluated without forming ``S^{-1}``.

    With ``X = S^{-1}`` the factors ``X^{1/2}`` and ``X^{-1/2}`` are
    ``S^{-1/2}`` and ``S^{1/2}``, both read off the eigendecomposition of S.
    """
    S, Y = as_spd(S), as_spd(Y)
    _same_dim(S, Y)
    t = _check_weight(t)
    half, inv_half = _half_powers(S)
    return _congruence_power(inv_half, half, Y, t)


def riccati_solve(A_s, A_t, cond_max=COND_MAX):
    """Unique SPD solution ``A`` of ``A A_s A = A_t``.

    Raises
    ------
    IllConditionedError
        If either input has condition number above ``cond_max``.
    """
    A_s, A_t = as_spd(A_s), as_spd(A_t)
    _same_dim(A_s, A_t)
    for M in (A_s, A_t):
        if M.cond > cond_max:
            raise IllConditionedError(M.cond, cond_max)
    return inverse_sharp_mean(A_s, A_t, 0.5)


def riemannian_distance_sq(X, Y):
    """Squared affine-invariant distance between two SPD matrices.

    Uses the generalized eigenvalues of the pencil ``(X, Y)``, which are the
    eigenvalues of ``Y^{-1/2} X Y^{-1/2}``.
    """
    X, Y = as_spd(X), as_spd(Y)
    _same_dim(X, Y)
    try:
        lam = linalg.eigvalsh(X.entries, Y.entries)
    except linalg.LinAlgError as exc:
        raise NumericalError(
            f"generalized eigenproblem failed (cond={Y.cond:.3e})"
        ) from exc
    return float(np.sum(np.log(lam) ** 2))


def regularize(M, eps=DEFAULT_EPS):
    """Promote a symmetric (PSD) matrix to SPD with a scaled ridge.

    Returns ``(M + M^T)/2 + eps * scale * I`` where ``scale`` is the mean of
    the diagonal, or 1 when that mean is below ``eps`` (e.g. the zero
    matrix), so the ridge tracks the data scale.
    """
    if eps <= 0:
        raise ContractError(f"eps must be positive, got {eps}")
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {M.shape}")
    M = 0.5 * (M + M.T)
    mean_diag = float(np.mean(np.diag(M)))
    scale = mean_diag if mean_diag >= eps else 1.0
    return SpdMatrix(M + eps * scale * np.eye(M.shape[0]))
