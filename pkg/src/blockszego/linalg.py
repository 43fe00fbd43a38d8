"""Small dense complex kernels.

Everything here works on plain ``numpy`` arrays. Dense matrices and block
vectors produced by the package are ``complex128`` and, where the package
allocates them, Fortran (column-major) ordered so that an ``n x s`` block
slice of a basis is contiguous.
"""
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg.blas import ztrsm

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    IndefiniteMatrix,
    InvalidInput,
    NotHermitian,
    SingularMatrix,
)

EPS = np.finfo(np.float64).eps

#: Largest matrix accepted by :func:`dense_eigenvalues` (projected matrices only).
MAX_DENSE_EIG_DIM = 8192


def as_dense(M, *, name="matrix"):
    """Return ``M`` as a finite complex128 2-d array in column-major order."""
    A = np.asarray(M)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got shape {A.shape}")
    A = np.asfortranarray(A, dtype=np.complex128)
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    return A


class QRResult(NamedTuple):
    Q: np.ndarray
    R: np.ndarray
    rank: int


def _phase_normalize(Q, R):
    d = np.diag(R)
    ph = np.ones_like(d)
    nz = np.abs(d) > 0
    ph[nz] = d[nz] / np.abs(d[nz])
    # Q D and D^* R with D = diag(phase): keeps QR fixed, makes diag(R) >= 0.
    return Q * ph[None, :], np.conj(ph)[:, None] * R


def thin_qr_rank_revealing(W, tol=None, scale=None):
    """Thin QR factorization that reports the numerical rank.

    Parameters
    ----------
    W : (n, s) array
    tol : float, optional
        Relative rank threshold. A pivot ``|R_jj|`` counts as nonzero when it
        exceeds ``tol * scale``. Defaults to ``eps * n``.
    scale : float, optional
        Reference magnitude for the threshold. Defaults to the largest pivot
        of ``W`` itself, which makes the test scale invariant. Krylov drivers
        pass the norm of the block *before* orthogonalization instead, so
        that a residual made of pure roundoff is reported as rank 0.

    Returns
    -------
    QRResult
        ``Q`` is ``n x r`` with orthonormal columns, ``R`` is ``r x s`` and
        ``W ~= Q @ R``. For full rank ``R`` is upper triangular with a
        positive real diagonal; otherwise ``R`` comes from a column-pivoted
        factorization with the permutation undone.
    """
    W = as_dense(W, name="W")
    n, s = W.shape
    if s > n:
        raise DimensionMismatch(f"thin QR needs n >= s, got {W.shape}")
    if tol is None:
        tol = EPS * n
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")

    if not np.any(W):
        return QRResult(np.zeros((n, 0), complex, order="F"), np.zeros((0, s), complex), 0)

    Q, R = scipy.linalg.qr(W, mode="economic")
    d = np.abs(np.diag(R))
    ref = d.max() if scale is None else scale
    if ref > 0 and np.all(d > tol * ref):
        Q, R = _phase_normalize(Q, R)
        return QRResult(np.asfortranarray(Q), np.triu(R), s)

    Qp, Rp, piv = scipy.linalg.qr(W, mode="economic", pivoting=True)
    d = np.abs(np.diag(Rp))
    ref = d[0] if scale is None else scale
    rank = int(np.count_nonzero(d > tol * ref)) if ref > 0 else 0
    Rfull = np.empty_like(Rp[:rank])
    Rfull[:, piv] = Rp[:rank]
    return QRResult(np.asfortranarray(Qp[:, :rank]), Rfull, rank)


def hermitian_psd_sqrt(M, tol_herm=1e-10, clamp=None):
    """Hermitian positive semidefinite square root via eigendecomposition.

    Eigenvalues in ``[-clamp, 0)`` are treated as roundoff and set to zero;
    ``clamp`` defaults to ``100 * eps * ||M||_2``.
    """
    M = as_dense(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch("square matrix required")
    nrm = np.linalg.norm(M)
    if np.linalg.norm(M - M.conj().T) > tol_herm * max(nrm, 1e-300):
        raise NotHermitian("matrix is not Hermitian to tolerance")
    H = 0.5 * (M + M.conj().T)
    w, U = np.linalg.eigh(H)
    if clamp is None:
        clamp = 1e2 * EPS * max(np.abs(w).max(initial=0.0), 1e-300)
    if w.size and w.min() < -clamp:
        raise IndefiniteMatrix(f"minimum eigenvalue {w.min():.3e} < -{clamp:.1e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    S = (U * w[None, :]) @ U.conj().T
    return 0.5 * (S + S.conj().T)


def small_inverse(M, tol_sing=None):
    """Inverse of a small square matrix, refusing numerically singular input."""
    M = as_dense(M)
    k = M.shape[0]
    if M.shape[1] != k:
        raise DimensionMismatch("square matrix required")
    sv = np.linalg.svd(M, compute_uv=False)
    if tol_sing is None:
        tol_sing = 10 * k * EPS
    if sv[-1] <= tol_sing * sv[0]:
        raise SingularMatrix(f"smallest singular value {sv[-1]:.3e} relative to {sv[0]:.3e}")
    return np.linalg.inv(M)


def _cholesky(rho):
    try:
        return scipy.linalg.cho_factor(rho, lower=False)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("Hermitian factor is not positive definite") from exc


def right_solve_hpd(Y, rho):
    """Return ``Y @ inv(rho)`` for Hermitian positive definite ``rho``."""
    R, _ = _cholesky(rho)
    # rho = R^* R, so Y rho^{-1} = (Y R^{-1}) R^{-*}; two right-sided trsm calls.
    Z = np.asfortranarray(Y, dtype=np.complex128)
    Z = ztrsm(1.0, R, Z, side=1, lower=0, trans_a=0)
    return ztrsm(1.0, R, Z, side=1, lower=0, trans_a=2, overwrite_b=1)


def left_solve_hpd(rho, Y):
    """Return ``inv(rho) @ Y`` for Hermitian positive definite ``rho``."""
    return scipy.linalg.cho_solve(_cholesky(rho), Y)


def dense_eigenvalues(M, max_dim=MAX_DENSE_EIG_DIM):
    """Eigenvalues of a small dense matrix (Ritz values of projected matrices)."""
    M = as_dense(M)
    k = M.shape[0]
    if M.shape[1] != k:
        raise DimensionMismatch("square matrix required")
    if k > max_dim:
        raise InvalidInput(f"dimension {k} exceeds the dense eigensolver cap {max_dim}")
    try:
        return scipy.linalg.eigvals(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc


def spectral_norm(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def frobenius_norm(M):
    return float(np.linalg.norm(np.asarray(M)))
