"""Matrix and Laurent matrix polynomials with coefficients on the right.

A polynomial ``P(z) = sum_k z^k C_k`` acts on a pair ``(A, B)`` as
``P(A) o B = sum_k A^k B C_k``. Its matrix-valued inner product is
``<<P, Q>>_{A,B} = (P(A) o B)^* (Q(A) o B)``, which for normal ``A`` is the
integral of ``P^* dmu Q`` against a discrete matrix-valued measure supported
on the spectrum of ``A``.

Text layout
-----------
Polynomials are written one exponent per line::

    # laurent s=2 low=-1      (or "# polynomial s=2 low=0")
    -1, re(C11), im(C11), re(C12), im(C12), ...

and measures one node per line::

    # measure s=2
    re(node), im(node), re(M11), im(M11), re(M12), im(M12), ...

with the ``s x s`` blocks flattened row-major as real/imaginary pairs.
"""
import numpy as np

from .errors import DimensionMismatch, InvalidInput, InvalidVerblunsky
from .krylov.types import VerblunskySequence
from .linalg import right_solve_hpd
from .operators import dense_normal_eigendecomposition

#: Relative tolerance below which eigenvalues are merged into one node.
NODE_TOL = 1e-10


class LaurentMatrixPolynomial:
    """``sum_{k=low}^{high} z^k C_k`` with ``s x s`` complex coefficients."""

    # let ``ndarray @ P`` fall through to __rmatmul__
    __array_ufunc__ = None

    def __init__(self, coeffs, low=0):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[1] != c.shape[2] or len(c) == 0:
            raise DimensionMismatch(f"coefficients must be a nonempty stack of square blocks, got {c.shape}")
        self.coeffs = c
        self.low = int(low)

    @property
    def s(self):
        return self.coeffs.shape[1]

    @property
    def high(self):
        return self.low + len(self.coeffs) - 1

    @property
    def exponents(self):
        return range(self.low, self.high + 1)

    def coeff(self, k):
        if self.low <= k <= self.high:
            return self.coeffs[k - self.low]
        return np.zeros((self.s, self.s), dtype=complex)

    def evaluate(self, z):
        """Value at a scalar ``z`` (``s x s``) or at an array of points (``(N, s, s)``)."""
        z = np.asarray(z, dtype=complex)
        pts = np.atleast_1d(z)
        powers = pts[:, None] ** np.arange(self.low, self.high + 1)[None, :]
        out = np.einsum("nk,kij->nij", powers, self.coeffs)
        return out[0] if z.ndim == 0 else out

    __call__ = evaluate

    def shift(self, k):
        """``z^k P``."""
        return self._make(self.coeffs, self.low + k)

    def _make(self, coeffs, low):
        if low >= 0 and type(self) is not LaurentMatrixPolynomial:
            return MatrixPolynomial(np.concatenate([np.zeros((low,) + coeffs.shape[1:], complex), coeffs]))
        return LaurentMatrixPolynomial(coeffs, low)

    def _aligned(self, other):
        if not isinstance(other, LaurentMatrixPolynomial):
            return NotImplemented
        if other.s != self.s:
            raise DimensionMismatch(f"block sizes {self.s} and {other.s} differ")
        lo, hi = min(self.low, other.low), max(self.high, other.high)
        a = np.zeros((hi - lo + 1, self.s, self.s), complex)
        b = a.copy()
        a[self.low - lo:self.high - lo + 1] = self.coeffs
        b[other.low - lo:other.high - lo + 1] = other.coeffs
        return a, b, lo

    def __add__(self, other):
        al = self._aligned(other)
        if al is NotImplemented:
            return al
        a, b, lo = al
        return _promote(self, other)(a + b, lo)

    def __sub__(self, other):
        al = self._aligned(other)
        if al is NotImplemented:
            return al
        a, b, lo = al
        return _promote(self, other)(a - b, lo)

    def __neg__(self):
        return self._make(-self.coeffs, self.low)

    def __matmul__(self, C):
        """Right multiplication by a constant ``s x s`` matrix."""
        return self._make(self.coeffs @ np.asarray(C, dtype=complex), self.low)

    def __rmatmul__(self, C):
        return self._make(np.asarray(C, dtype=complex) @ self.coeffs, self.low)

    def __mul__(self, c):
        if np.ndim(c):
            return NotImplemented
        return self._make(self.coeffs * c, self.low)

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12):
        a, b, _ = self._aligned(other)
        return bool(np.max(np.abs(a - b), initial=0.0) <= atol)

    def to_text(self):
        s = self.s
        kind = "polynomial" if isinstance(self, MatrixPolynomial) else "laurent"
        lines = [f"# {kind} s={s} low={self.low}"]
        for k, C in zip(self.exponents, self.coeffs):
            flat = np.column_stack([C.real.ravel(), C.imag.ravel()]).ravel()
            lines.append(", ".join([str(k)] + [repr(float(x)) for x in flat]))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"<{type(self).__name__} s={self.s} exponents [{self.low}, {self.high}]>"


class MatrixPolynomial(LaurentMatrixPolynomial):
    """Ordinary matrix polynomial ``C_0 + z C_1 + ... + z^d C_d``."""

    def __init__(self, coeffs):
        super().__init__(coeffs, low=0)

    @property
    def degree(self):
        return self.high

    @classmethod
    def identity(cls, s):
        return cls(np.eye(s, dtype=complex))

    @classmethod
    def monomial(cls, k, s):
        c = np.zeros((k + 1, s, s), complex)
        c[k] = np.eye(s)
        return cls(c)


def _promote(p, q):
    if isinstance(p, MatrixPolynomial) and isinstance(q, MatrixPolynomial):
        return lambda c, lo: MatrixPolynomial(c)
    return LaurentMatrixPolynomial


def laurent_monomial(k, s):
    return LaurentMatrixPolynomial(np.eye(s, dtype=complex), low=k)


def polynomial_from_text(text):
    """Inverse of :meth:`LaurentMatrixPolynomial.to_text`."""
    header, rows = _parse_table(text)
    s = int(header.get("s", 0))
    exps, coeffs = [], []
    for r in rows:
        exps.append(int(r[0]))
        coeffs.append(_unflatten(r[1:], s))
    if not exps:
        raise InvalidInput("polynomial text has no coefficient lines")
    if exps != list(range(exps[0], exps[0] + len(exps))):
        raise InvalidInput("exponents must be consecutive")
    if exps[0] >= 0 and header.get("kind") == "polynomial":
        return MatrixPolynomial(np.concatenate([np.zeros((exps[0], s, s), complex), coeffs]))
    return LaurentMatrixPolynomial(np.array(coeffs), exps[0])


def _parse_table(text):
    header, rows = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split()
            if words:
                header["kind"] = words[0]
            for w in words[1:]:
                k, _, v = w.partition("=")
                header[k] = v
            continue
        rows.append([float(x) for x in line.split(",")])
    return header, rows


def _unflatten(vals, s):
    v = np.asarray(vals, dtype=float)
    if v.size != 2 * s * s:
        raise InvalidInput(f"expected {2 * s * s} numbers per block, got {v.size}")
    return (v[0::2] + 1j * v[1::2]).reshape(s, s)


def reversed_polynomial(P, k=None):
    """``P^#(z) = z^k P(1/conj(z))^*``: coefficient ``C_j`` moves to ``z^{k-j}`` as ``C_j^*``."""
    k = P.degree if k is None else k
    if P.degree > k:
        raise InvalidInput(f"degree {P.degree} exceeds reversal degree {k}")
    c = np.zeros((k + 1, P.s, P.s), complex)
    for j in range(P.degree + 1):
        c[k - j] = P.coeffs[j].conj().T
    return MatrixPolynomial(c)


def _check_block(P, B):
    if P.s != np.shape(B)[1]:
        raise DimensionMismatch(f"polynomial block size {P.s} does not match B with {np.shape(B)[1]} columns")


def poly_action(P, A, B):
    """``P(A) o B = sum_k A^k B C_k`` using ``deg P`` multiplications with ``A``."""
    _check_block(P, B)
    B = np.asarray(B, dtype=complex)
    if P.low < 0:
        raise InvalidInput("negative exponents need laurent_action")
    out = np.zeros_like(B)
    Z = B
    for k in range(P.high + 1):
        if k:
            Z = A.apply(Z)
        C = P.coeff(k)
        if np.any(C):
            out = out + Z @ C
    return out


def laurent_action(R, A, B):
    """``sum_k A^k B C_k`` over negative and positive ``k``.

    Negative powers use ``A^{-1}``, which is ``A^*`` for unitary operators;
    others must provide an inverse (:class:`InverseUnavailable` otherwise).
    """
    _check_block(R, B)
    B = np.asarray(B, dtype=complex)
    out = B @ R.coeff(0)
    Z = B
    for k in range(1, max(R.high, 0) + 1):
        Z = A.apply(Z)
        out = out + Z @ R.coeff(k)
    Z = B
    for k in range(1, max(-R.low, 0) + 1):
        Z = A.apply_inverse(Z)
        out = out + Z @ R.coeff(-k)
    return out


def action(P, A, B):
    return laurent_action(P, A, B) if P.low < 0 else poly_action(P, A, B)


def inner_product_action(P, Q, A, B):
    """``<<P, Q>>_{A,B} = (P(A) o B)^* (Q(A) o B)``."""
    return action(P, A, B).conj().T @ action(Q, A, B)


class SpectralMeasure:
    """Discrete matrix-valued measure ``sum_j M_j delta(z - lambda_j)``."""

    def __init__(self, nodes, weights, herm_tol=1e-12):
        lam = np.asarray(nodes, dtype=complex).ravel()
        W = np.asarray(weights, dtype=complex)
        if W.ndim != 3 or W.shape[0] != lam.size or W.shape[1] != W.shape[2]:
            raise DimensionMismatch(f"weights of shape {W.shape} do not match {lam.size} nodes")
        scale = max(float(np.max(np.abs(W), initial=0.0)), 1.0)
        if np.max(np.abs(W - W.conj().transpose(0, 2, 1)), initial=0.0) > herm_tol * scale:
            raise InvalidInput("measure weights must be Hermitian")
        self.nodes = lam
        self.weights = 0.5 * (W + W.conj().transpose(0, 2, 1))

    @property
    def s(self):
        return self.weights.shape[1]

    def __len__(self):
        return self.nodes.size

    def total_mass(self):
        return self.weights.sum(axis=0)

    def to_text(self):
        lines = [f"# measure s={self.s}"]
        for z, M in zip(self.nodes, self.weights):
            flat = np.column_stack([M.real.ravel(), M.imag.ravel()]).ravel()
            lines.append(", ".join(repr(float(x)) for x in (z.real, z.imag, *flat)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        header, rows = _parse_table(text)
        s = int(header.get("s", 0))
        nodes = [r[0] + 1j * r[1] for r in rows]
        weights = np.array([_unflatten(r[2:], s) for r in rows]).reshape(len(rows), s, s)
        return cls(nodes, weights)

    def __repr__(self):
        return f"<SpectralMeasure s={self.s} nodes={len(self)}>"


def merge_nodes(eigenvalues, tol=NODE_TOL):
    """Group eigenvalues closer than ``tol * max|lambda|``; returns (nodes, labels)."""
    lam = np.asarray(eigenvalues, dtype=complex)
    thresh = tol * max(float(np.max(np.abs(lam), initial=0.0)), np.finfo(float).tiny)
    nodes = []
    labels = np.empty(lam.size, dtype=int)
    for i, z in enumerate(lam):
        if nodes:
            d = np.abs(np.asarray(nodes) - z)
            j = int(np.argmin(d))
            if d[j] <= thresh:
                labels[i] = j
                continue
        labels[i] = len(nodes)
        nodes.append(z)
    return np.asarray(nodes, dtype=complex), labels


def spectral_measure_of(A, B, tol_node=NODE_TOL, tol_normal=1e-10):
    """Spectral measure of the pair ``(A, B)`` for normal ``A``.

    Weights are ``sum (u_j^* B)^* (u_j^* B)`` over each group of merged
    eigenvalues. Operators that keep their eigendecomposition are used
    directly; others are decomposed densely (:class:`NotNormal` if ``A``
    is not normal).
    """
    lam, U = dense_normal_eigendecomposition(A, tol_normal)
    B = np.asarray(B, dtype=complex)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != U.shape[0]:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, operator has size {U.shape[0]}")
    nodes, labels = merge_nodes(lam, tol_node)
    G = U.conj().T @ B
    s = B.shape[1]
    W = np.zeros((nodes.size, s, s), dtype=complex)
    np.add.at(W, labels, G.conj()[:, :, None] * G[:, None, :])
    return SpectralMeasure(nodes, W)


def inner_product_measure(P, Q, mu):
    """``sum_j P(lambda_j)^* M_j Q(lambda_j)``; works for Laurent polynomials too."""
    if P.s != mu.s or Q.s != mu.s:
        raise DimensionMismatch("polynomial and measure block sizes differ")
    Pv = P.evaluate(mu.nodes)
    Qv = Q.evaluate(mu.nodes)
    return np.einsum("nji,njk,nkl->il", Pv.conj(), mu.weights, Qv)


def _as_sequence(alphas):
    return alphas if isinstance(alphas, VerblunskySequence) else VerblunskySequence(alphas)


def szego_polynomials(alphas, m=None):
    """Right orthonormal polynomials and reversed left ones from Verblunsky coefficients.

    Returns lists ``phi_r[0..m]`` and ``phi_l_rev[0..m]`` starting at ``I``
    and advanced by

    ``phi_r[k+1] = (z phi_r[k] - phi_l_rev[k] alpha_{k+1}^*) rho_r(k+1)^{-1}``
    ``phi_l_rev[k+1] = (phi_l_rev[k] - z phi_r[k] alpha_{k+1}) rho_l(k+1)^{-1}``.
    """
    seq = _as_sequence(alphas)
    m = len(seq) if m is None else m
    if m > len(seq):
        raise InvalidInput(f"need alpha_1..alpha_{m}, have {len(seq)}")
    bad = np.flatnonzero(seq.norms[:m] >= 1)
    if bad.size:
        raise InvalidVerblunsky(f"||alpha_{bad[0] + 1}||_2 >= 1")
    s = seq.s if len(seq) else 1
    right = [MatrixPolynomial.identity(s)]
    left = [MatrixPolynomial.identity(s)]
    for k in range(m):
        a = seq.alpha(k + 1)
        zr = right[k].shift(1)
        r = zr - (left[k] @ a.conj().T)
        l = left[k] - (zr @ a)
        right.append(MatrixPolynomial(_right_solve_coeffs(r.coeffs, seq.rho_r(k + 1))))
        left.append(MatrixPolynomial(_right_solve_coeffs(l.coeffs, seq.rho_l(k + 1))))
    return right, left


def _right_solve_coeffs(c, rho):
    d, s, _ = c.shape
    flat = c.transpose(1, 0, 2).reshape(s * d, s)  # stack coefficients vertically
    return right_solve_hpd(flat, rho).reshape(s, d, s).transpose(1, 0, 2).copy()


def cmv_basis(alphas, m):
    """Orthonormal Laurent basis ``chi_0..chi_{m-1}`` of the extended space.

    ``chi_{2k} = z^{-k} phi_l_rev[2k]`` and ``chi_{2k+1} = z^{-k} phi_r[2k+1]``,
    so the exponents follow the generator order ``1, z, z^{-1}, z^2, ...``.
    Needs ``alpha_1..alpha_{m-1}``.
    """
    right, left = szego_polynomials(alphas, m - 1)
    out = []
    for j in range(m):
        k = j // 2
        base = left[j] if j % 2 == 0 else right[j]
        out.append(LaurentMatrixPolynomial(base.coeffs, -k))
    return out
