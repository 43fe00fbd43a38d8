"""Full-orthogonalization drivers: block Arnoldi and block extended Arnoldi.

Both compare each new block with every stored block, so step ``k`` costs
``k`` block inner products. They are the reference methods the short
recurrences are measured against.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import DeflationError, DimensionMismatch, InvalidInput
from ..linalg import thin_qr_rank_revealing
from .types import (
    RANK_TOL,
    BlockBasis,
    BlockHessenberg,
    Counters,
    DeflationReport,
    new_basis,
    start_block,
)


@dataclass
class ArnoldiResult:
    basis: BlockBasis
    H: BlockHessenberg
    deflation: DeflationReport
    counters: Counters
    start_factor: np.ndarray = None
    finalized: bool = False

    @property
    def completed(self):
        return self.deflation is None


@dataclass
class ExtendedArnoldiResult:
    basis: BlockBasis
    deflation: DeflationReport
    counters: Counters
    start_factor: np.ndarray = None

    @property
    def completed(self):
        return self.deflation is None


def _check(A, B, m):
    if m < 1:
        raise InvalidInput("m must be >= 1")
    if np.shape(B)[0] != A.dim:
        raise DimensionMismatch(f"B has {np.shape(B)[0]} rows, operator has size {A.dim}")


def _orthogonalize(Q, X, passes):
    """Classical block Gram-Schmidt of ``X`` against the columns of ``Q``."""
    coeff = np.zeros((Q.shape[1], X.shape[1]), dtype=complex)
    for _ in range(passes):
        c = (X.conj().T @ Q).conj().T  # avoids a conjugated copy of Q
        X = X - Q @ c
        coeff += c
    return X, coeff


def _scale(X):
    """Largest column norm of the block before orthogonalization."""
    return float(np.sqrt(np.max(np.sum(np.abs(X) ** 2, axis=0))))


def _residual_qr(X, W, tol, step, s):
    qr = thin_qr_rank_revealing(W, tol=tol, scale=_scale(X))
    if qr.rank < s:
        return qr, DeflationReport(step, qr.rank, s, float(np.linalg.norm(W)), qr.Q, qr.R)
    return qr, None


def block_arnoldi(A, B, m, tol=RANK_TOL, strict=False, finalize=False):
    """Block Arnoldi with one classical Gram-Schmidt pass per step.

    Runs ``m - 1`` steps to produce ``V_1..V_m`` and the first ``m - 1``
    block columns of the Hessenberg matrix. With ``finalize`` one more
    multiplication fills in column ``m`` (and ``H_{m+1,m}``) so that
    ``H.dense()`` is the full projection ``V^* A V``.

    A residual whose numerical rank (relative to the largest column norm of ``A V_k``) drops
    below ``s`` stops the run; the partial basis and a
    :class:`DeflationReport` are returned, or :class:`DeflationError` is
    raised when ``strict``.

    The counters tally ``k`` projections plus the QR factor as the block
    inner products of step ``k``.
    """
    _check(A, B, m)
    W1, R0 = start_block(B)
    n, s = W1.shape
    basis = new_basis(n, m, s, "polynomial")
    V = basis.matrix
    V[:, :s] = W1
    H = np.zeros((m * s, m * s), dtype=complex)
    counters = Counters()
    report = None
    k_done = 1
    for k in range(1, m):
        X = A.apply(V[:, (k - 1) * s:k * s])
        W, coeff = _orthogonalize(V[:, :k * s], X, 1)
        H[:k * s, (k - 1) * s:k * s] = coeff
        qr, report = _residual_qr(X, W, tol, k, s)
        counters.step(k + 1)
        if report is not None:
            break
        V[:, k * s:(k + 1) * s] = qr.Q
        H[k * s:(k + 1) * s, (k - 1) * s:k * s] = qr.R
        k_done = k + 1

    if report is not None:
        basis = basis.leading(k_done)
        H = H[:k_done * s, :k_done * s]
        result = ArnoldiResult(basis, BlockHessenberg(H, s), report, counters, R0)
        if strict:
            raise DeflationError(str(report), report, result)
        return result

    result = ArnoldiResult(basis, BlockHessenberg(H, s), None, counters, R0)
    if finalize:
        finalize_arnoldi(A, result, tol)
    return result


def finalize_arnoldi(A, result, tol=RANK_TOL):
    """Fill in the last block column of ``H`` (one extra multiplication)."""
    if result.finalized:
        return result
    V = result.basis.matrix
    s = result.basis.s
    m = len(result.basis)
    X = A.apply(V[:, (m - 1) * s:])
    W, coeff = _orthogonalize(V, X, 1)
    result.H.matrix[:, (m - 1) * s:] = coeff
    qr = thin_qr_rank_revealing(W, tol=tol, scale=_scale(X))
    result.H.subdiagonal = qr.R if qr.rank == s else None
    result.counters.step(m + 1)
    result.finalized = True
    return result


def block_extended_arnoldi(A, B, m, tol=RANK_TOL, strict=False):
    """Gram-Schmidt orthogonalization of the extended block Krylov space.

    Generators follow the order ``B, A B, A^{-1} B, A^2 B, A^{-2} B, ...``:
    even blocks are obtained by applying ``A`` to the latest block of
    positive degree, odd ones by applying ``A^{-1}`` (``A^*`` for unitary
    ``A``) to the latest block of negative degree. Each new block is
    orthogonalized against all previous ones with two classical
    Gram-Schmidt passes.
    """
    _check(A, B, m)
    W1, R0 = start_block(B)
    n, s = W1.shape
    basis = new_basis(n, m, s, "extended")
    Wm = basis.matrix
    Wm[:, :s] = W1
    counters = Counters()
    report = None
    last_pos = last_neg = 0
    k_done = 1
    for j in range(1, m):
        if j % 2:
            X = A.apply(Wm[:, last_pos * s:(last_pos + 1) * s])
            last_pos = j
        else:
            X = A.apply_inverse(Wm[:, last_neg * s:(last_neg + 1) * s])
            last_neg = j
        W, _ = _orthogonalize(Wm[:, :j * s], X, 2)
        qr, report = _residual_qr(X, W, tol, j, s)
        counters.step(2 * j + 1, adjoint=not j % 2)
        if report is not None:
            break
        Wm[:, j * s:(j + 1) * s] = qr.Q
        k_done = j + 1

    if report is not None:
        result = ExtendedArnoldiResult(basis.leading(k_done), report, counters, R0)
        if strict:
            raise DeflationError(str(report), report, result)
        return result
    return ExtendedArnoldiResult(basis, None, counters, R0)
