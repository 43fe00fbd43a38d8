"""Containers shared by the Krylov drivers.

Block indices in the ``block(...)``/``alpha(...)`` accessors are 1-based to
mirror block-matrix notation (``H_{1,1}`` is ``H.block(1, 1)``); sequence
indexing with ``[]`` stays 0-based like any Python sequence.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, InvalidStart, InvalidVerblunsky
from ..linalg import as_dense, hermitian_psd_sqrt, thin_qr_rank_revealing

#: Default deflation margin for the short recurrences: stop once ||alpha||_2 >= 1 - EPS_DEFL.
EPS_DEFL = 1e-8
#: Default relative rank threshold for the Gram-Schmidt drivers.
RANK_TOL = 1e-10
#: How far B^*B may be from I_s before the start block is re-orthonormalized.
START_TOL = 1e-12


class BlockBasis:
    """Ordered family of ``n x s`` blocks stored side by side in one array."""

    def __init__(self, matrix, s, kind="polynomial"):
        self.matrix = matrix
        self.s = int(s)
        self.kind = kind

    @property
    def n(self):
        return self.matrix.shape[0]

    def __len__(self):
        return self.matrix.shape[1] // self.s

    def __getitem__(self, k):
        if isinstance(k, slice):
            idx = range(len(self))[k]
            return [self[i] for i in idx]
        if k < 0:
            k += len(self)
        if not 0 <= k < len(self):
            raise IndexError(k)
        return self.matrix[:, k * self.s:(k + 1) * self.s]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def block(self, k):
        """Block ``V_k`` (1-based)."""
        return self[k - 1]

    def leading(self, k):
        """The first ``k`` blocks as a new basis (a view, not a copy)."""
        return BlockBasis(self.matrix[:, :k * self.s], self.s, self.kind)

    def __repr__(self):
        return f"<BlockBasis {self.kind} n={self.n} s={self.s} m={len(self)}>"


class VerblunskySequence:
    """Matrix Verblunsky coefficients with their defect matrices.

    ``rho_r(k) = (I - a a^*)^{1/2}`` and ``rho_l(k) = (I - a^* a)^{1/2}``
    for ``a = alpha(k)``. All stored coefficients must satisfy
    ``||alpha_k||_2 < 1`` except, when ``terminal`` is set, the last one,
    which may sit on the boundary (``<= 1``). That happens when the final
    coefficient is recovered after the Krylov space is exhausted.
    """

    def __init__(self, alphas, terminal=False, boundary_tol=1e-10):
        a = np.asarray(alphas, dtype=complex)
        if a.ndim == 2 and a.size == 0:
            a = a.reshape(0, 0, 0)
        if a.ndim == 1:
            a = a[:, None, None]
        if a.ndim != 3 or (a.size and a.shape[1] != a.shape[2]):
            raise DimensionMismatch(f"alphas must be a stack of square blocks, got {a.shape}")
        self._alphas = a
        self.terminal = bool(terminal) and len(a) > 0
        norms = np.array([np.linalg.norm(x, 2) for x in a])
        self.norms = norms
        hard = len(a) - 1 if self.terminal else len(a)
        bad = np.flatnonzero(norms[:hard] >= 1)
        if bad.size:
            k = bad[0] + 1
            raise InvalidVerblunsky(f"||alpha_{k}||_2 = {norms[bad[0]]:.16g} >= 1")
        if self.terminal and norms[-1] > 1 + boundary_tol:
            raise InvalidVerblunsky(f"terminal ||alpha||_2 = {norms[-1]:.16g} > 1")
        s = a.shape[1] if a.size else 0
        eye = np.eye(s)
        self._rho_r = np.array([hermitian_psd_sqrt(eye - x @ x.conj().T) for x in a]).reshape(a.shape)
        self._rho_l = np.array([hermitian_psd_sqrt(eye - x.conj().T @ x) for x in a]).reshape(a.shape)

    @property
    def s(self):
        return self._alphas.shape[1] if self._alphas.size else 0

    @property
    def alphas(self):
        return self._alphas

    def __len__(self):
        return len(self._alphas)

    def __getitem__(self, k):
        return self._alphas[k]

    def alpha(self, k):
        return self._alphas[k - 1]

    def rho_r(self, k):
        return self._rho_r[k - 1]

    def rho_l(self, k):
        return self._rho_l[k - 1]

    def append(self, alpha, terminal=False):
        a = np.asarray(alpha, dtype=complex)[None]
        stack = a if not len(self) else np.concatenate([self._alphas, a])
        return VerblunskySequence(stack, terminal=terminal)

    def truncated(self, k):
        return VerblunskySequence(self._alphas[:k])

    def __repr__(self):
        return f"<VerblunskySequence s={self.s} len={len(self)}{' terminal' if self.terminal else ''}>"


class BlockHessenberg:
    """Square ``ms x ms`` block upper Hessenberg matrix.

    ``subdiagonal`` optionally keeps ``H_{m+1,m}``, the block that couples
    the last basis block to the (not stored) next one.
    """

    def __init__(self, matrix, s, subdiagonal=None):
        self.matrix = np.asarray(matrix)
        self.s = int(s)
        self.subdiagonal = subdiagonal

    @property
    def m(self):
        return self.matrix.shape[0] // self.s

    def block(self, h, k):
        s = self.s
        if h == self.m + 1 and k == self.m and self.subdiagonal is not None:
            return self.subdiagonal
        return self.matrix[(h - 1) * s:h * s, (k - 1) * s:k * s]

    def dense(self):
        return self.matrix

    def __repr__(self):
        return f"<BlockHessenberg m={self.m} s={self.s}>"


def cmv_pattern(m):
    """Boolean ``m x m`` mask of block positions that may be nonzero in a cutoff CMV matrix.

    Rows ``2p-1`` and ``2p`` can only touch columns ``2p-2 .. 2p+1``.
    """
    mask = np.zeros((m, m), dtype=bool)
    for i in range(1, m + 1):
        p = (i + 1) // 2
        for j in range(max(1, 2 * p - 2), min(m, 2 * p + 1) + 1):
            mask[i - 1, j - 1] = True
    return mask


class CMVStructure:
    """Cutoff block CMV matrix ``C_m`` assembled from Verblunsky coefficients."""

    def __init__(self, matrix, s, alphas):
        self.matrix = matrix
        self.s = int(s)
        self.alphas = alphas

    @property
    def m(self):
        return self.matrix.shape[0] // self.s

    def block(self, i, j):
        s = self.s
        return self.matrix[(i - 1) * s:i * s, (j - 1) * s:j * s]

    def pattern(self):
        return cmv_pattern(self.m)

    def block_norms(self):
        m, s = self.m, self.s
        B = self.matrix.reshape(m, s, m, s)
        return np.sqrt((np.abs(B) ** 2).sum(axis=(1, 3)))

    def dense(self):
        return self.matrix

    def __repr__(self):
        return f"<CMVStructure m={self.m} s={self.s}>"


@dataclass
class DeflationReport:
    """Where and how a run lost rank.

    ``rank`` is the numerical rank of the new residual block; 0 is a
    breakdown, anything in ``1..s-1`` a deflation. ``Q`` and ``R`` hold the
    rank-revealing factors of the residual when the driver computed them.
    """

    step: int
    rank: int
    s: int
    residual_norm: float
    Q: np.ndarray = None
    R: np.ndarray = None

    @property
    def breakdown(self):
        return self.rank == 0

    @property
    def label(self):
        return "breakdown" if self.breakdown else "deflation"

    def __str__(self):
        return (f"{self.label} at step {self.step}: rank {self.rank} < {self.s}, "
                f"residual {self.residual_norm:.3e}")


@dataclass
class Counters:
    """Operation counts of one run."""

    applications: int = 0
    adjoint_applications: int = 0
    inner_products: int = 0
    inner_products_per_step: list = field(default_factory=list)

    @property
    def operator_applications(self):
        return self.applications + self.adjoint_applications

    def step(self, inner_products, adjoint=False):
        if adjoint:
            self.adjoint_applications += 1
        else:
            self.applications += 1
        self.inner_products += inner_products
        self.inner_products_per_step.append(inner_products)

    def as_dict(self):
        return {
            "applications": self.applications,
            "adjoint_applications": self.adjoint_applications,
            "operator_applications": self.operator_applications,
            "inner_products": self.inner_products,
        }


def start_block(B, tol=START_TOL, rank_tol=None):
    """Return ``(W1, R)`` with ``B = W1 R`` and ``W1^* W1 = I``.

    ``R`` is ``None`` when ``B`` is already orthonormal to ``tol``.
    """
    B = as_dense(B, name="B")
    s = B.shape[1]
    if np.linalg.norm(B.conj().T @ B - np.eye(s)) <= tol:
        return np.asfortranarray(B), None
    qr = thin_qr_rank_revealing(B, tol=rank_tol)
    if qr.rank < s:
        raise InvalidStart(f"starting block has numerical rank {qr.rank} < {s}")
    return qr.Q, qr.R


def new_basis(n, m, s, kind):
    return BlockBasis(np.zeros((n, m * s), dtype=complex, order="F"), s, kind)
