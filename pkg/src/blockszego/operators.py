"""Matrix-free operators and the concrete test matrices.

An operator only has to know how to multiply an ``n x s`` block by ``A``
and, when it advertises ``has_adjoint``, by ``A^*``. Unitary operators get
their inverse for free (``A^{-1} = A^*``), which is all the extended Krylov
code needs.

Random constructions use :func:`numpy.random.default_rng` (PCG64) seeded
with a 64-bit integer, so a fixed seed gives bit-identical matrices.
"""
import json
import os

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from .errors import (
    AdjointUnavailable,
    DimensionMismatch,
    InvalidParameter,
    InverseUnavailable,
    NotNormal,
)
from .linalg import as_dense

UNIT_MODULUS_TOL = 1e-10


class LinearOperator:
    """Square operator acting on ``n x s`` blocks.

    Subclasses implement ``_apply`` and, if available, ``_apply_adjoint``
    and ``_apply_inverse``.
    """

    has_adjoint = False
    has_inverse = False

    def __init__(self, dim, *, is_unitary=False, is_normal=False):
        self.dim = int(dim)
        self.is_unitary = bool(is_unitary)
        self.is_normal = bool(is_normal or is_unitary)

    @property
    def shape(self):
        return (self.dim, self.dim)

    def _block(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != self.dim:
            raise DimensionMismatch(f"operator of size {self.dim} applied to block of shape {X.shape}")
        return X

    def apply(self, X):
        return self._apply(self._block(X))

    def apply_adjoint(self, X):
        if not self.has_adjoint:
            raise AdjointUnavailable(f"{type(self).__name__} has no adjoint")
        return self._apply_adjoint(self._block(X))

    def apply_inverse(self, X):
        if self.is_unitary and self.has_adjoint:
            return self.apply_adjoint(X)
        if not self.has_inverse:
            raise InverseUnavailable(f"{type(self).__name__} has no inverse")
        return self._apply_inverse(self._block(X))

    def __matmul__(self, X):
        return self.apply(X)

    def to_dense(self):
        return np.asarray(self.apply(np.eye(self.dim, dtype=complex)))

    def __repr__(self):
        flags = [f for f in ("unitary", "normal") if getattr(self, f"is_{f}")]
        return f"<{type(self).__name__} n={self.dim} {' '.join(flags)}>"


class CallableOperator(LinearOperator):
    """Wrap user callables ``matvec(X)`` and optionally ``rmatvec(X)``."""

    def __init__(self, dim, matvec, rmatvec=None, **flags):
        super().__init__(dim, **flags)
        self._matvec = matvec
        self._rmatvec = rmatvec
        self.has_adjoint = rmatvec is not None

    def _apply(self, X):
        return self._matvec(X)

    def _apply_adjoint(self, X):
        return self._rmatvec(X)


class IdentityOperator(LinearOperator):
    has_adjoint = True
    has_inverse = True

    def __init__(self, dim):
        super().__init__(dim, is_unitary=True)

    def _apply(self, X):
        return np.array(X, dtype=complex)

    _apply_adjoint = _apply
    _apply_inverse = _apply


class DenseOperator(LinearOperator):
    has_adjoint = True

    def __init__(self, matrix, *, is_unitary=False, is_normal=False):
        M = as_dense(matrix, name="operator matrix")
        if M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {M.shape}")
        super().__init__(M.shape[0], is_unitary=is_unitary, is_normal=is_normal)
        self.matrix = M

    def _apply(self, X):
        return self.matrix @ X

    def _apply_adjoint(self, X):
        return self.matrix.conj().T @ X

    def to_dense(self):
        return self.matrix.copy()


class SpectralOperator(DenseOperator):
    """Normal matrix ``U diag(lambda) U^*`` that keeps its eigendecomposition."""

    def __init__(self, eigenvalues, eigenvectors, *, is_unitary=False):
        lam = np.asarray(eigenvalues, dtype=complex)
        U = np.asarray(eigenvectors, dtype=complex)
        super().__init__((U * lam[None, :]) @ U.conj().T, is_unitary=is_unitary, is_normal=True)
        self.eigenvalues = lam
        self.eigenvectors = U
        self.has_inverse = bool(np.all(lam != 0))

    def _apply_inverse(self, X):
        U = self.eigenvectors
        return U @ ((U.conj().T @ X) / self.eigenvalues[:, None])


def _as_csr(M):
    A = sp.csr_array(M, dtype=np.complex128)
    A.sum_duplicates()
    A.sort_indices()
    A.check_format(full_check=True)
    return A


class SparseOperator(LinearOperator):
    """Compressed-row complex sparse matrix (column indices sorted)."""

    has_adjoint = True

    def __init__(self, matrix, *, is_unitary=False, is_normal=False):
        A = _as_csr(matrix)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {A.shape}")
        super().__init__(A.shape[0], is_unitary=is_unitary, is_normal=is_normal)
        self.matrix = A
        self._adjoint = _as_csr(A.conj().T)

    @property
    def nnz(self):
        return self.matrix.nnz

    def _apply(self, X):
        return self.matrix @ X

    def _apply_adjoint(self, X):
        return self._adjoint @ X

    def to_dense(self):
        return self.matrix.toarray()


# -- Floquet matrices --------------------------------------------------------


def _theta_entries(a):
    r = np.sqrt(1.0 - abs(a) ** 2)
    return np.conj(a), r, r, -a


def floquet_factors(alpha_seq):
    """Sparse factors ``F1, F2`` of the Floquet unitary ``A = F1 F2``.

    ``F1`` is block diagonal with ``Theta(alpha_1), Theta(alpha_3), ...``
    on the index pairs (0,1), (2,3), ...; ``F2`` carries
    ``Theta(alpha_2), Theta(alpha_4), ...`` on (1,2), (3,4), ... and a
    wrap-around ``Theta(alpha_n)`` on the corner pair (n-1, 0), where
    ``Theta(a) = [[conj(a), rho], [rho, -a]]`` and ``rho = sqrt(1 - |a|^2)``.
    """
    a = np.asarray(alpha_seq, dtype=complex).ravel()
    n = a.size
    if n < 2 or n % 2:
        raise InvalidParameter(f"Floquet size must be even and >= 2, got {n}")
    if np.any(np.abs(a) >= 1):
        raise InvalidParameter("Floquet parameters must lie in the open unit disk")

    def assemble(pairs):
        rows, cols, vals = [], [], []
        for (i, j), aj in pairs:
            t = _theta_entries(aj)
            rows += [i, i, j, j]
            cols += [i, j, i, j]
            vals += list(t)
        return _as_csr(sp.coo_array((vals, (rows, cols)), shape=(n, n)))

    # 1-based alpha_j with j odd sits on rows (j-1, j) of F1.
    F1 = assemble([((j, j + 1), a[j]) for j in range(0, n, 2)])
    # alpha_n uses (row 0, col 0) for conj(a) and (n-1, n-1) for -a.
    F2 = assemble([((j, j + 1), a[j]) for j in range(1, n - 1, 2)] + [((0, n - 1), a[n - 1])])
    return F1, F2


class FloquetOperator(LinearOperator):
    """Factored Floquet unitary: each apply is two sparse products."""

    has_adjoint = True

    def __init__(self, alpha_seq):
        F1, F2 = floquet_factors(alpha_seq)
        super().__init__(F1.shape[0], is_unitary=True)
        self.alphas = np.asarray(alpha_seq, dtype=complex).ravel()
        self.F1, self.F2 = F1, F2
        self._F1h = _as_csr(F1.conj().T)
        self._F2h = _as_csr(F2.conj().T)

    def _apply(self, X):
        return self.F1 @ (self.F2 @ X)

    def _apply_adjoint(self, X):
        return self._F2h @ (self._F1h @ X)

    def assembled(self):
        return _as_csr(self.F1 @ self.F2)

    def to_dense(self):
        return self.assembled().toarray()


def floquet_unitary(alpha_seq, assemble="factored"):
    """Floquet unitary built from ``alpha_seq``; see :func:`floquet_factors`."""
    if assemble == "factored":
        return FloquetOperator(alpha_seq)
    if assemble == "sparse":
        return SparseOperator(FloquetOperator(alpha_seq).assembled(), is_unitary=True)
    raise InvalidParameter(f"assemble must be 'factored' or 'sparse', got {assemble!r}")


def random_disk_points(n, rng, radius=1.0):
    """Uniform samples from the open disk of the given radius."""
    rng = np.random.default_rng(rng)
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def random_floquet(n, seed, assemble="factored"):
    return floquet_unitary(random_disk_points(n, np.random.default_rng(seed)), assemble)


# -- synthetic spectra -------------------------------------------------------


def haar_unitary(n, rng):
    """Haar-distributed unitary: QR of a complex Gaussian, diag(R) made positive."""
    rng = np.random.default_rng(rng)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


def normal_with_spectrum(eigenvalues, seed):
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    if not np.all(np.isfinite(lam)):
        raise InvalidParameter("eigenvalues must be finite")
    U = haar_unitary(lam.size, np.random.default_rng(seed))
    on_circle = bool(np.all(np.abs(np.abs(lam) - 1) <= UNIT_MODULUS_TOL))
    return SpectralOperator(lam, U, is_unitary=on_circle)


def unitary_with_spectrum(eigenvalues, seed, tol=UNIT_MODULUS_TOL):
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    dev = np.abs(np.abs(lam) - 1)
    if dev.size and dev.max() > tol:
        raise InvalidParameter(f"eigenvalue off the unit circle by {dev.max():.3e}")
    return normal_with_spectrum(lam, seed)


def gapped_spectrum(n, seed, repeated=4, value=1.0, gap=0.35):
    """``repeated`` copies of ``value`` plus ``n - repeated`` random points on
    the unit circle whose arguments avoid ``(-gap, gap)`` around ``value``."""
    rng = np.random.default_rng(seed)
    value = complex(value)
    phases = rng.uniform(gap, 2 * np.pi - gap, n - repeated)
    return np.concatenate([np.full(repeated, value), value * np.exp(1j * phases)])


# -- verification helpers ----------------------------------------------------


def unitarity_defect(op, s=4, seed=0):
    """``||A^*(A X) - X||_F / ||X||_F`` on a random block."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((op.dim, s)) + 1j * rng.standard_normal((op.dim, s))
    return float(np.linalg.norm(op.apply_adjoint(op.apply(X)) - X) / np.linalg.norm(X))


def normality_defect(M):
    M = np.asarray(M)
    return float(np.linalg.norm(M @ M.conj().T - M.conj().T @ M))


# -- Matrix Market exchange --------------------------------------------------


def write_matrix_market(path, op, comment="", precision=17):
    """Write ``op`` as complex general Matrix Market.

    Sparse and Floquet operators are written in coordinate format, dense
    ones in array format; ``precision`` significant digits make the text
    round trip bit-exact.
    """
    if isinstance(op, FloquetOperator):
        M = op.assembled()
    elif isinstance(op, SparseOperator):
        M = op.matrix
    elif isinstance(op, LinearOperator):
        M = op.to_dense()
    else:
        M = op
    if sp.issparse(M):
        M = sp.coo_array(M)
    else:
        M = np.asarray(M, dtype=complex)
    scipy.io.mmwrite(os.fspath(path), M, comment=comment, field="complex",
                     precision=precision, symmetry="general")


def read_matrix_market(path, verify_unitary=True, tol=1e-10):
    """Load a Matrix Market file as an operator.

    With ``verify_unitary`` the operator is probed on a random block and
    flagged unitary only if ``||A^*A X - X|| <= tol ||X||``.
    """
    M = scipy.io.mmread(os.fspath(path))
    if sp.issparse(M):
        op = SparseOperator(M)
    else:
        op = DenseOperator(M)
    if verify_unitary:
        op.is_unitary = unitarity_defect(op) <= tol
        op.is_normal = op.is_normal or op.is_unitary
    return op


def write_sidecar(path, meta):
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def read_sidecar(path):
    with open(path) as fh:
        return json.load(fh)


def dense_normal_eigendecomposition(op, tol=1e-10):
    """Orthonormal eigendecomposition of a normal operator via complex Schur.

    For a normal matrix the Schur form is diagonal, so the Schur vectors are
    orthonormal eigenvectors even inside repeated eigenspaces.
    """
    if isinstance(op, SpectralOperator):
        return op.eigenvalues, op.eigenvectors
    M = op.to_dense()
    scale = max(np.linalg.norm(M, 2), 1e-300)
    if normality_defect(M) > tol * scale**2 * max(1, np.sqrt(M.shape[0])):
        raise NotNormal("operator is not normal to tolerance")
    T, Z = scipy.linalg.schur(M, output="complex")
    return np.diag(T).copy(), Z
