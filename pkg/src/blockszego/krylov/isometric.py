"""Block isometric Arnoldi and the Schur parametrization of its Hessenberg matrix."""
from dataclasses import dataclass

import numpy as np

from ..errors import DeflationError, DimensionMismatch, InvalidInput, VerblunskyOverflow
from ..linalg import hermitian_psd_sqrt, right_solve_hpd
from .types import (
    EPS_DEFL,
    BlockBasis,
    BlockHessenberg,
    Counters,
    DeflationReport,
    VerblunskySequence,
    new_basis,
    start_block,
)


@dataclass
class IsometricResult:
    """Output of :func:`block_isometric_arnoldi`.

    ``last_aux`` is always the final auxiliary block ``Vt_m`` (needed to
    recover ``alpha_m``); ``aux`` holds all of them only when requested.
    """

    basis: BlockBasis
    alphas: VerblunskySequence
    deflation: DeflationReport
    counters: Counters
    last_aux: np.ndarray
    aux: BlockBasis = None
    start_factor: np.ndarray = None
    boundary: bool = False

    @property
    def completed(self):
        return self.deflation is None

    @property
    def finalized(self):
        return len(self.alphas) == len(self.basis)


def overflow_report(alpha, step, residual, eps_defl):
    """Deflation report for a coefficient with ``||alpha||_2 >= 1 - eps_defl``.

    Singular values of ``alpha`` at the boundary are directions in which
    ``rho_r`` vanishes, so the surviving rank is the count of the others.
    """
    sv = np.linalg.svd(alpha, compute_uv=False)
    rank = int(np.count_nonzero(sv < 1 - eps_defl))
    return DeflationReport(step, rank, alpha.shape[0], float(residual))


def _defects(alpha):
    eye = np.eye(alpha.shape[0])
    return (hermitian_psd_sqrt(eye - alpha @ alpha.conj().T),
            hermitian_psd_sqrt(eye - alpha.conj().T @ alpha))


def block_isometric_arnoldi(A, B, m, eps_defl=EPS_DEFL, strict=False, finalize=False, keep_aux=True):
    """Orthonormal basis of the block Krylov space of a unitary ``A``.

    Each step costs one multiplication with ``A`` and one ``s x s`` block
    inner product (the next Verblunsky coefficient); the new blocks come
    from a two-term update of ``V_k`` and the auxiliary block ``Vt_k``.

    If some ``||alpha_k||_2 >= 1 - eps_defl`` the space has deflated; the
    run stops there and returns ``V_1..V_k`` with a
    :class:`DeflationReport` (or raises :class:`VerblunskyOverflow` when
    ``strict``).
    """
    if m < 1:
        raise InvalidInput("m must be >= 1")
    if np.shape(B)[0] != A.dim:
        raise DimensionMismatch(f"B has {np.shape(B)[0]} rows, operator has size {A.dim}")
    V1, R0 = start_block(B)
    n, s = V1.shape
    basis = new_basis(n, m, s, "polynomial")
    V = basis.matrix
    V[:, :s] = V1
    aux = new_basis(n, m, s, "polynomial") if keep_aux else None
    Vt = V1.copy(order="F")
    if keep_aux:
        aux.matrix[:, :s] = Vt
    alphas = []
    counters = Counters()
    report = None
    k_done = 1
    for k in range(1, m):
        X = A.apply(V[:, (k - 1) * s:k * s])
        alpha = X.conj().T @ Vt
        counters.step(1)
        Y = X - Vt @ alpha.conj().T
        if np.linalg.norm(alpha, 2) >= 1 - eps_defl:
            report = overflow_report(alpha, k, np.linalg.norm(Y), eps_defl)
            break
        Yt = Vt - X @ alpha
        rho_r, rho_l = _defects(alpha)
        V[:, k * s:(k + 1) * s] = right_solve_hpd(Y, rho_r)
        Vt = np.asfortranarray(right_solve_hpd(Yt, rho_l))
        if keep_aux:
            aux.matrix[:, k * s:(k + 1) * s] = Vt
        alphas.append(alpha)
        k_done = k + 1

    seq = VerblunskySequence(np.array(alphas).reshape(len(alphas), s, s))
    if report is not None:
        result = IsometricResult(basis.leading(k_done), seq, report, counters, Vt,
                                 aux.leading(k_done) if keep_aux else None, R0)
        if strict:
            raise VerblunskyOverflow(str(report), report, result)
        return result
    result = IsometricResult(basis, seq, None, counters, Vt, aux, R0)
    if finalize:
        finalize_alpha_m(A, result, eps_defl)
    return result


def finalize_alpha_m(A, result, eps_defl=EPS_DEFL):
    """Append ``alpha_m = (A V_m)^* Vt_m`` at the cost of one more multiplication.

    The new coefficient may lie on the unit sphere when the Krylov space of
    order ``m + 1`` is already exhausted; it is then stored as a terminal
    coefficient and ``result.boundary`` is set.
    """
    if result.finalized:
        return result.alphas
    s = result.basis.s
    Vm = result.basis.matrix[:, -s:]
    X = A.apply(Vm)
    alpha = X.conj().T @ result.last_aux
    result.counters.step(1)
    result.boundary = bool(np.linalg.norm(alpha, 2) >= 1 - eps_defl)
    result.alphas = result.alphas.append(alpha, terminal=True)
    return result.alphas


def _rho_l_products(alphas, m):
    """``P[h][k] = rho_l(h) ... rho_l(k-1)`` for ``1 <= h <= k <= m`` (empty product = I)."""
    s = alphas.s
    P = {}
    for k in range(1, m + 1):
        acc = np.eye(s, dtype=complex)
        P[(k, k)] = acc
        for h in range(k - 1, 0, -1):
            acc = alphas.rho_l(h) @ acc
            P[(h, k)] = acc
    return P


def hessenberg_from_schur(alphas, m=None):
    """Assemble ``H_m = V_m^* A V_m`` from ``alpha_1..alpha_m``.

    Block column ``k`` is ``rho_l(1)..rho_l(k-1) alpha_k^*`` in row 1,
    ``-alpha_{h-1} rho_l(h)..rho_l(k-1) alpha_k^*`` in rows ``2..k`` and
    ``rho_r(k)`` just below the diagonal.
    """
    if not isinstance(alphas, VerblunskySequence):
        alphas = VerblunskySequence(alphas, terminal=True)
    m = len(alphas) if m is None else m
    if m < 1 or m > len(alphas):
        raise InvalidInput(f"need alpha_1..alpha_{m}, have {len(alphas)}")
    s = alphas.s
    P = _rho_l_products(alphas, m)
    H = np.zeros((m * s, m * s), dtype=complex)
    for k in range(1, m + 1):
        ak = alphas.alpha(k).conj().T
        col = slice((k - 1) * s, k * s)
        H[:s, col] = P[(1, k)] @ ak
        for h in range(2, k + 1):
            H[(h - 1) * s:h * s, col] = -alphas.alpha(h - 1) @ P[(h, k)] @ ak
        if k < m:
            H[k * s:(k + 1) * s, col] = alphas.rho_r(k)
    return BlockHessenberg(H, s, subdiagonal=alphas.rho_r(m))


def schur_factors(alphas, m=None):
    """Dense unitary factors ``G_1..G_{m-1}`` and the truncated ``G~_m``.

    ``G_k`` is the identity except for the ``2s x 2s`` core
    ``[[alpha_k^*, rho_l(k)], [rho_r(k), -alpha_k]]`` on block rows/columns
    ``k, k+1``; ``G~_m`` replaces the last diagonal block by ``alpha_m^*``.
    Their ordered product equals :func:`hessenberg_from_schur`.
    """
    if not isinstance(alphas, VerblunskySequence):
        alphas = VerblunskySequence(alphas, terminal=True)
    m = len(alphas) if m is None else m
    s = alphas.s
    N = m * s
    factors = []
    for k in range(1, m):
        G = np.eye(N, dtype=complex)
        i, j, e = (k - 1) * s, k * s, (k + 1) * s
        a = alphas.alpha(k)
        G[i:j, i:j] = a.conj().T
        G[i:j, j:e] = alphas.rho_l(k)
        G[j:e, i:j] = alphas.rho_r(k)
        G[j:e, j:e] = -a
        factors.append(G)
    Gm = np.eye(N, dtype=complex)
    Gm[N - s:, N - s:] = alphas.alpha(m).conj().T
    return factors, Gm


def schur_product(alphas, m=None):
    factors, Gm = schur_factors(alphas, m)
    P = Gm.copy()
    for G in reversed(factors):
        P = G @ P
    return P


def reconstruct_aux(basis, alphas, k):
    """Rebuild ``Vt_k`` from ``V_1..V_k`` and ``alpha_1..alpha_{k-1}``.

    ``Vt_k = V_1 rho_l(1)..rho_l(k-1) - sum_{h=2}^{k-1} V_h alpha_{h-1}
    rho_l(h)..rho_l(k-1) - V_k alpha_{k-1}``, with ``Vt_1 = V_1``.
    """
    if k == 1:
        return basis.block(1).copy()
    P = _rho_l_products(alphas, k)
    out = basis.block(1) @ P[(1, k)]
    for h in range(2, k):
        out = out - basis.block(h) @ (alphas.alpha(h - 1) @ P[(h, k)])
    return out - basis.block(k) @ alphas.alpha(k - 1)
