"""Thin numerical backend: SVD, eigendecomposition, least squares.

Keeps the algorithm modules free of direct solver calls so backend choices
stay in one place.  Conventions: a singular value decomposition is returned
as H = U diag(S) V^* (V carries the right singular vectors as columns), and
an eigendecomposition as A = B^{-1} diag(lambda) B.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RankDeficiencyError

# Eigenvector-matrix condition beyond which an eigendecomposition is
# considered numerically unreliable (near-defective input).
EIGVEC_COND_LIMIT = 1e12


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Rank-K factorization H ~ U diag(S) V^*.

    ``spectrum`` keeps the full singular value sequence of the input so rank
    diagnostics never need a second decomposition.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    spectrum: np.ndarray


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition A = B^{-1} diag(eigenvalues) B."""

    eigenvalues: np.ndarray
    eigvecs_inv: np.ndarray  # the matrix B
    eigvec_cond: float


def truncated_svd(matrix: np.ndarray, K: int) -> SvdResult:
    """Top-K singular triplets of a dense complex matrix.

    The decomposition is computed in full and truncated, so S is exactly the
    leading part of ``spectrum``.
    """
    H = np.asarray(matrix, dtype=np.complex128)
    if H.ndim != 2 or H.size == 0:
        raise DomainError(f"expected a nonempty 2-d matrix, got shape {H.shape}")
    kmax = min(H.shape)
    if not 1 <= K <= kmax:
        raise DomainError(f"truncation order must be in 1..{kmax}, got {K}")
    U, s, Vh = np.linalg.svd(H, full_matrices=False)
    return SvdResult(
        U=_readonly(U[:, :K]),
        S=_readonly(s[:K]),
        V=_readonly(Vh[:K].conj().T),
        spectrum=_readonly(s),
    )


def eig_full(matrix: np.ndarray) -> EigResult:
    """Dense eigendecomposition of a square matrix.

    Warns when the eigenvector matrix is so ill-conditioned that the input
    is numerically defective.
    """
    A = np.asarray(matrix, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.size == 0:
        raise DomainError(f"expected a nonempty square matrix, got shape {A.shape}")
    eigenvalues, vecs = np.linalg.eig(A)
    cond = float(np.linalg.cond(vecs))
    if not np.isfinite(cond) or cond > EIGVEC_COND_LIMIT:
        warnings.warn(
            f"eigenvector matrix condition {cond:.3e} exceeds {EIGVEC_COND_LIMIT:.0e}; "
            "input is numerically defective",
            RuntimeWarning,
            stacklevel=2,
        )
    B = np.linalg.inv(vecs)
    return EigResult(eigenvalues=_readonly(eigenvalues), eigvecs_inv=_readonly(B), eigvec_cond=cond)


def lstsq(A: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Minimum-residual solution of A X = Y via orthogonal factorization.

    Never forms the normal equations.  Raises
    :class:`RankDeficiencyError` carrying the numerical rank when A loses
    full column rank.
    """
    A = np.asarray(A, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    if A.ndim != 2 or A.size == 0:
        raise DomainError(f"expected a nonempty 2-d coefficient matrix, got shape {A.shape}")
    if Y.shape[0] != A.shape[0]:
        raise DomainError(f"rhs has {Y.shape[0]} rows, expected {A.shape[0]}")
    X, _, rank, _ = np.linalg.lstsq(A, Y, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficiencyError(
            f"least-squares matrix has numerical rank {rank} < {A.shape[1]} columns",
            rank=int(rank),
        )
    return X


def lstsq_minimum_norm(A: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares solve that tolerates rank deficiency.

    Returns the minimum-norm solution together with the condition estimate
    sigma_max / sigma_min of A (inf when A is numerically rank deficient).
    """
    A = np.asarray(A, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    X, _, rank, s = np.linalg.lstsq(A, Y, rcond=None)
    if s.size == 0 or s[-1] == 0 or rank < min(A.shape):
        cond = np.inf
    else:
        cond = float(s[0] / s[-1])
    return X, cond
