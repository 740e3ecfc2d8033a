"""Dense symmetric linear algebra shared by the geometric modules.

Everything here operates on small (dim <= ~15) real matrices.  Reductions
run in fixed index order and the eigensolver is LAPACK's deterministic
symmetric driver, so repeated calls on identical inputs are bit-stable.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import InputDomainError, NotPSDError

PSD_CLAMP_REL = 1e-8


class SymMatrix:
    """A real symmetric matrix, symmetrized exactly on construction."""

    __slots__ = ("a",)

    def __init__(self, entries):
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputDomainError(f"expected a square array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputDomainError("matrix has non-finite entries")
        self.a = 0.5 * (a + a.T)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def __array__(self, dtype=None):
        return self.a if dtype is None else self.a.astype(dtype)

    def __repr__(self):
        return f"SymMatrix({self.a!r})"


def _as_sym_array(m) -> np.ndarray:
    if isinstance(m, SymMatrix):
        return m.a
    return SymMatrix(m).a


def op_norm(m) -> float:
    """Operator (spectral) norm of a symmetric matrix."""
    a = _as_sym_array(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


def sym_eig(m):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvector columns), with
    Q @ diag(w) @ Q.T reconstructing the input to machine accuracy.
    """
    a = _as_sym_array(m)
    w, q = np.linalg.eigh(a)
    order = np.argsort(w)[::-1]
    return w[order], q[:, order]


def psd_sqrt(m) -> SymMatrix:
    """Unique PSD square root of a symmetric PSD matrix.

    Eigenvalues within -PSD_CLAMP_REL*(1+||m||) of zero are clamped to 0;
    anything more negative raises NotPSDError.
    """
    a = _as_sym_array(m)
    w, q = np.linalg.eigh(a)
    scale = 1.0 + (float(np.max(np.abs(w))) if w.size else 0.0)
    eps = PSD_CLAMP_REL * scale
    if w.size and w[0] < -eps:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below PSD tolerance {-eps:.3e}")
    w = np.clip(w, 0.0, None)
    r = (q * np.sqrt(w)) @ q.T
    return SymMatrix(r)


def mat_exp(m) -> np.ndarray:
    """Matrix exponential of a square real array."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputDomainError(f"expected a square array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputDomainError("matrix has non-finite entries")
    return expm(a)


def mat_log_spd(m) -> np.ndarray:
    """Principal logarithm of a symmetric positive-definite matrix."""
    a = _as_sym_array(m)
    w, q = np.linalg.eigh(a)
    if w.size and w[0] <= 0.0:
        raise InputDomainError(f"matrix is not positive definite (min eig {w[0]:.3e})")
    return (q * np.log(w)) @ q.T


def mat_exp_log(m, mode: str) -> np.ndarray:
    """Dispatch to `mat_exp` (mode 'exp') or `mat_log_spd` (mode 'log_spd')."""
    if mode == "exp":
        return mat_exp(m)
    if mode == "log_spd":
        return mat_log_spd(m)
    raise InputDomainError(f"unknown mode {mode!r}")


def sym_exp(m) -> np.ndarray:
    """Exponential of a symmetric matrix via its eigendecomposition.

    Cheaper and exactly symmetric, used on geodesic hot paths.
    """
    a = _as_sym_array(m)
    w, q = np.linalg.eigh(a)
    return (q * np.exp(w)) @ q.T


def spd_inv_sqrt(m):
    """(sqrt(P), sqrt(P)^-1) for SPD P, from one eigendecomposition."""
    a = _as_sym_array(m)
    w, q = np.linalg.eigh(a)
    if w.size and w[0] <= 0.0:
        raise InputDomainError(f"matrix is not positive definite (min eig {w[0]:.3e})")
    s = np.sqrt(w)
    return (q * s) @ q.T, (q / s) @ q.T
