"""Accuracy measures for computed bases and projected matrices."""
import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch
from .krylov.types import EPS_DEFL, VerblunskySequence
from .linalg import dense_eigenvalues


def _matrix(X):
    return X.matrix if hasattr(X, "matrix") else np.asarray(X)


def _dense(T):
    return T.dense() if hasattr(T, "dense") else np.asarray(T)


def orthogonality_error(basis):
    """``||X^* X - I||_F`` for the stacked basis ``X``."""
    X = _matrix(basis)
    return float(np.linalg.norm(X.conj().T @ X - np.eye(X.shape[1])))


def projection_error(A, basis, T):
    """``||X^* A X - T||_F``."""
    X = _matrix(basis)
    T = _dense(T)
    if T.shape != (X.shape[1], X.shape[1]):
        raise DimensionMismatch(f"projected matrix {T.shape} does not match basis with {X.shape[1]} columns")
    return float(np.linalg.norm(X.conj().T @ A.apply(X) - T))


def ritz_values(T):
    return dense_eigenvalues(_dense(T))


def ritz_distances(T, target, j_max):
    """The ``j_max`` smallest distances ``|theta_i - target|`` over the Ritz values of ``T``.

    Entries beyond the number of Ritz values are NaN.
    """
    d = np.sort(np.abs(ritz_values(T) - target))
    out = np.full(j_max, np.nan)
    out[:min(j_max, d.size)] = d[:j_max]
    return out


def match_eigenvalues(a, b, ambiguity=1e-6):
    """Pair two eigenvalue multisets and return the maximal gap.

    Values are first paired in order of their argument. When neighbouring
    arguments are closer than ``ambiguity`` or the greedy pairing is worse
    than ``ambiguity``, an optimal assignment (minimizing the sum of
    distances) is computed as well and the smaller maximal gap is kept.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise DimensionMismatch(f"multisets of sizes {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    pa, pb = np.sort(np.angle(a)), np.sort(np.angle(b))
    ia, ib = np.argsort(np.angle(a), kind="stable"), np.argsort(np.angle(b), kind="stable")
    greedy = float(np.max(np.abs(a[ia] - b[ib])))
    ambiguous = a.size > 1 and min(np.min(np.diff(pa)), np.min(np.diff(pb))) < ambiguity
    if not ambiguous and greedy <= ambiguity:
        return greedy
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return min(greedy, float(np.max(cost[r, c])))


def similarity_check(H, C):
    """Maximal eigenvalue gap between two projected matrices after pairing."""
    Hd, Cd = _dense(H), _dense(C)
    if Hd.shape != Cd.shape:
        raise DimensionMismatch(f"shapes {Hd.shape} and {Cd.shape} differ")
    return match_eigenvalues(dense_eigenvalues(Hd), dense_eigenvalues(Cd))


@dataclass
class VerblunskyReport:
    norms: np.ndarray
    rho_identity: np.ndarray
    min_eig: np.ndarray
    eps_defl: float = EPS_DEFL

    @property
    def ok(self):
        return bool(np.all(self.norms < 1 - self.eps_defl))

    def __str__(self):
        lines = ["k  ||alpha||_2  rho_identity  min_eig(I-aa*)"]
        for k, (a, r, e) in enumerate(zip(self.norms, self.rho_identity, self.min_eig), 1):
            lines.append(f"{k:<3d}{a:.6e}  {r:.3e}     {e:.6e}")
        lines.append("ok" if self.ok else "FAILED: some ||alpha_k||_2 >= 1 - eps_defl")
        return "\n".join(lines)


def verify_verblunsky(alphas, eps_defl=EPS_DEFL):
    """Per-coefficient norms, ``||rho_r a - a rho_l||_F`` and the smallest eigenvalue of ``I - a a^*``.

    Accepts coefficients of any norm; the defect roots are taken of the
    clamped spectrum so that a corrupted sequence still yields a report.
    """
    a = alphas.alphas if isinstance(alphas, VerblunskySequence) else np.asarray(alphas, dtype=complex)
    if a.ndim == 1:
        a = a[:, None, None]
    norms, resid, mins = [], [], []
    for x in a:
        eye = np.eye(x.shape[0])
        wr, Ur = np.linalg.eigh(eye - x @ x.conj().T)
        wl, Ul = np.linalg.eigh(eye - x.conj().T @ x)
        rr = (Ur * np.sqrt(np.clip(wr, 0, None))) @ Ur.conj().T
        rl = (Ul * np.sqrt(np.clip(wl, 0, None))) @ Ul.conj().T
        norms.append(np.linalg.norm(x, 2))
        resid.append(np.linalg.norm(rr @ x - x @ rl))
        mins.append(wr[0])
    return VerblunskyReport(np.array(norms), np.array(resid), np.array(mins), eps_defl)


@dataclass
class ExperimentResult:
    """Rows of one experiment plus the metadata needed to reproduce it."""

    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **values):
        missing = set(self.columns) - set(values)
        if missing:
            raise DimensionMismatch(f"missing columns {sorted(missing)}")
        self.rows.append([values[c] for c in self.columns])

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def write_meta(self, path):
        with open(path, "w") as fh:
            for k, v in self.meta.items():
                fh.write(f"{k} = {v}\n")

    @classmethod
    def read_csv(cls, path):
        with open(path) as fh:
            rows = list(csv.reader(fh))
        return cls(rows[0], [[_parse(v) for v in r] for r in rows[1:]])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "nan" if np.isnan(v) else repr(float(v))
    return str(v)


def _parse(v):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v
