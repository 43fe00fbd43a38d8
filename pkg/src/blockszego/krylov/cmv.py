"""CMV-based orthogonalization of extended block Krylov spaces of unitary matrices.

The basis ``W_1, W_2, ...`` spans ``B, A B, A^* B, A^2 B, A^{*2} B, ...``.
Odd steps multiply ``W_{2k-1}`` by ``A^*`` and read ``alpha_{2k}`` off
``C_{2k-1,2k}``; even steps multiply ``W_{2k}`` by ``A`` and read
``alpha_{2k+1}`` off ``C_{2k+1,2k}``. Every other CMV block needed by the
recurrence is formed from the coefficients, never by inner products.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, InvalidInput, VerblunskyOverflow
from ..linalg import left_solve_hpd, right_solve_hpd
from .isometric import _defects, overflow_report
from .types import (
    EPS_DEFL,
    BlockBasis,
    CMVStructure,
    Counters,
    DeflationReport,
    VerblunskySequence,
    new_basis,
    start_block,
)


@dataclass
class CMVResult:
    basis: BlockBasis
    alphas: VerblunskySequence
    deflation: DeflationReport
    counters: Counters
    #: CMV blocks formed during the run, keyed by 1-based ``(i, j)``.
    blocks: dict = field(default_factory=dict)
    start_factor: np.ndarray = None
    boundary: bool = False
    cmv: CMVStructure = None

    @property
    def completed(self):
        return self.deflation is None

    @property
    def finalized(self):
        return len(self.alphas) == len(self.basis)


class _State:
    """Coefficients and defect matrices read so far (1-based lists)."""

    def __init__(self):
        self.alpha = [None]
        self.rho_r = [None]
        self.rho_l = [None]

    def push(self, a):
        r, l = _defects(a)
        self.alpha.append(a)
        self.rho_r.append(r)
        self.rho_l.append(l)


def block_cmv_arnoldi(A, B, m, eps_defl=EPS_DEFL, strict=False, finalize=False):
    """Orthonormal CMV basis ``W_1..W_m`` of the extended block Krylov space.

    Costs one multiplication with ``A`` or ``A^*``, one block inner product
    and a linear combination of at most four blocks per step. A coefficient
    with ``||alpha||_2 >= 1 - eps_defl`` signals deflation: the run stops
    with a :class:`DeflationReport` (or raises :class:`VerblunskyOverflow`
    when ``strict``).
    """
    if m < 1:
        raise InvalidInput("m must be >= 1")
    if np.shape(B)[0] != A.dim:
        raise DimensionMismatch(f"B has {np.shape(B)[0]} rows, operator has size {A.dim}")
    if not A.has_adjoint:
        A.apply_adjoint(np.zeros((A.dim, 1)))  # raises AdjointUnavailable
    W1, R0 = start_block(B)
    n, s = W1.shape
    basis = new_basis(n, m, s, "extended")
    Wm = basis.matrix
    Wm[:, :s] = W1
    C = {(1, 0): np.zeros((s, s), complex)}
    st = _State()
    counters = Counters()
    report = None
    k_done = 1

    def W(j):
        if j == 0:
            return np.zeros((n, s), complex)
        return Wm[:, (j - 1) * s:j * s]

    def overflow(a, step, Y):
        if np.linalg.norm(a, 2) >= 1 - eps_defl:
            return overflow_report(a, step, np.linalg.norm(Y), eps_defl)
        return None

    if m >= 2:
        X = A.apply(W1)
        C[1, 1] = W1.conj().T @ X
        counters.step(1)
        a1 = C[1, 1].conj().T
        Y = X - W1 @ C[1, 1]
        report = overflow(a1, 1, Y)
        if report is None:
            st.push(a1)
            C[2, 1] = st.rho_r[1]
            Wm[:, s:2 * s] = right_solve_hpd(Y, st.rho_r[1])
            k_done = 2

    for j in range(3, m + 1):
        if report is not None:
            break
        if j % 2:
            k = (j - 1) // 2
            X = A.apply_adjoint(W(2 * k - 1))
            C[2 * k - 1, 2 * k] = X.conj().T @ W(2 * k)
            counters.step(1, adjoint=True)
            # C_{2k-1,2k} = rho_l(2k-1) alpha_{2k}^*
            a = left_solve_hpd(st.rho_l[2 * k - 1], C[2 * k - 1, 2 * k]).conj().T
            Y = (X - W(2 * k - 2) @ C[2 * k - 1, 2 * k - 2].conj().T
                 - W(2 * k - 1) @ C[2 * k - 1, 2 * k - 1].conj().T
                 - W(2 * k) @ C[2 * k - 1, 2 * k].conj().T)
            report = overflow(a, j - 1, Y)
            if report is not None:
                break
            st.push(a)
            a_prev = st.alpha[2 * k - 1]
            C[2 * k - 1, 2 * k + 1] = st.rho_l[2 * k - 1] @ st.rho_l[2 * k]
            C[2 * k, 2 * k] = -a_prev @ a.conj().T
            C[2 * k, 2 * k + 1] = -a_prev @ st.rho_l[2 * k]
            # (rho_l(2k) rho_l(2k-1))^{-1} = rho_l(2k-1)^{-1} rho_l(2k)^{-1}
            Wm[:, (j - 1) * s:j * s] = right_solve_hpd(right_solve_hpd(Y, st.rho_l[2 * k - 1]), st.rho_l[2 * k])
        else:
            k = (j - 2) // 2
            X = A.apply(W(2 * k))
            C[2 * k + 1, 2 * k] = W(2 * k + 1).conj().T @ X
            counters.step(1)
            # C_{2k+1,2k} = alpha_{2k+1}^* rho_r(2k)
            a = left_solve_hpd(st.rho_r[2 * k], C[2 * k + 1, 2 * k].conj().T)
            Y = (X - W(2 * k - 1) @ C[2 * k - 1, 2 * k]
                 - W(2 * k) @ C[2 * k, 2 * k]
                 - W(2 * k + 1) @ C[2 * k + 1, 2 * k])
            report = overflow(a, j - 1, Y)
            if report is not None:
                break
            st.push(a)
            a_prev = st.alpha[2 * k]
            C[2 * k + 1, 2 * k + 1] = -a.conj().T @ a_prev
            C[2 * k + 2, 2 * k] = st.rho_r[2 * k + 1] @ st.rho_r[2 * k]
            C[2 * k + 2, 2 * k + 1] = -st.rho_r[2 * k + 1] @ a_prev
            Wm[:, (j - 1) * s:j * s] = right_solve_hpd(right_solve_hpd(Y, st.rho_r[2 * k]), st.rho_r[2 * k + 1])
        k_done = j

    del C[1, 0]
    seq = VerblunskySequence(np.array(st.alpha[1:]).reshape(len(st.alpha) - 1, s, s))
    if report is not None:
        result = CMVResult(basis.leading(k_done), seq, report, counters, C, R0)
        if strict:
            raise VerblunskyOverflow(str(report), report, result)
        return result
    result = CMVResult(basis, seq, None, counters, C, R0)
    if finalize:
        finalize_cmv(A, result, eps_defl)
    return result


def finalize_cmv(A, result, eps_defl=EPS_DEFL):
    """Recover ``alpha_m`` with one more multiplication and assemble the cutoff ``C_m``."""
    if result.finalized:
        if result.cmv is None:
            result.cmv = cmv_cutoff(result.alphas, len(result.basis))
        return result.cmv
    B = result.basis
    m, s = len(B), B.s
    st = result.alphas
    if m == 1:
        X = A.apply(B.block(1))
        c = B.block(1).conj().T @ X
        a = c.conj().T
        result.counters.step(1)
    elif m % 2 == 0:
        k = m // 2
        X = A.apply_adjoint(B.block(2 * k - 1))
        c = X.conj().T @ B.block(2 * k)
        a = left_solve_hpd(st.rho_l(2 * k - 1), c).conj().T
        result.counters.step(1, adjoint=True)
    else:
        k = (m - 1) // 2
        X = A.apply(B.block(2 * k))
        c = B.block(2 * k + 1).conj().T @ X
        a = left_solve_hpd(st.rho_r(2 * k), c.conj().T)
        result.counters.step(1)
    result.boundary = bool(np.linalg.norm(a, 2) >= 1 - eps_defl)
    result.alphas = st.append(a, terminal=True)
    result.cmv = cmv_cutoff(result.alphas, m)
    return result.cmv


def _theta(alphas, k, s):
    if k <= len(alphas):
        a = alphas.alpha(k)
        return a.conj().T, alphas.rho_l(k), alphas.rho_r(k), -a
    z, e = np.zeros((s, s), complex), np.eye(s)
    return z, e, e, z


def lm_factors(alphas, nblocks):
    """Leading ``nblocks`` block rows/columns of the ``L`` and ``M`` factors.

    ``L`` carries ``Theta(alpha_1), Theta(alpha_3), ...`` on block pairs
    (1,2), (3,4), ...; ``M`` starts with ``I_s`` and carries
    ``Theta(alpha_2), Theta(alpha_4), ...`` on (2,3), (4,5), ..., where
    ``Theta(a) = [[a^*, rho_l], [rho_r, -a]]``. Coefficients past the end
    of ``alphas`` are taken as zero. A pair cut by the border keeps only
    its upper-left block.
    """
    s = alphas.s
    N = nblocks * s

    def place(F, k, i):
        a_h, rl, rr, ma = _theta(alphas, k, s)
        r0, r1, r2 = (i - 1) * s, i * s, (i + 1) * s
        F[r0:r1, r0:r1] = a_h
        if i < nblocks:
            F[r0:r1, r1:r2] = rl
            F[r1:r2, r0:r1] = rr
            F[r1:r2, r1:r2] = ma

    L = np.zeros((N, N), complex)
    M = np.zeros((N, N), complex)
    for i in range(1, nblocks + 1, 2):
        place(L, i, i)
    M[:s, :s] = np.eye(s)
    for i in range(2, nblocks + 1, 2):
        place(M, i, i)
    return L, M


def cmv_cutoff(alphas, m=None):
    """Cutoff block CMV matrix: the leading ``m x m`` blocks of ``L M``.

    Only ``alpha_1..alpha_m`` enter; blocks outside the band pattern of
    :func:`~blockszego.krylov.types.cmv_pattern` are exactly zero.
    """
    if not isinstance(alphas, VerblunskySequence):
        alphas = VerblunskySequence(alphas, terminal=True)
    m = len(alphas) if m is None else m
    if m < 1 or m > len(alphas):
        raise InvalidInput(f"need alpha_1..alpha_{m}, have {len(alphas)}")
    s = alphas.s
    trunc = alphas.truncated(m) if m < len(alphas) else alphas
    L, M = lm_factors(trunc, m + 1)
    Cm = (L @ M)[:m * s, :m * s]
    return CMVStructure(Cm, s, trunc)
