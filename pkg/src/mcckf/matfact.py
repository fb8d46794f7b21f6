"""Array-algorithm kernels shared by the factored-form filters.

Provides the triangularizing orthogonal transform (QR post-array), the
backward modified weighted Gram-Schmidt orthogonalization (MWGS), UD and
SVD decompositions of symmetric matrices, and triangular solves.  All
functions are pure and operate on plain ndarrays, so they are safe to call
concurrently.

Factor conventions
------------------
* Cholesky: ``A = S.T @ S`` with ``S`` upper triangular, nonnegative diagonal.
* UD: ``A = U @ diag(d) @ U.T`` with ``U`` unit upper triangular, ``d >= 0``.
* SVD: ``A = V @ diag(dsqrt**2) @ V.T`` with ``V`` orthogonal and ``dsqrt``
  the square-rooted singular values in descending order.

Explicit matrix inversion is deliberately absent; callers realize every
inverse-factor product through :func:`tri_solve` or diagonal division.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DecompositionError, InvalidWeightError, SingularFactorError
from .validation import check_symmetric

__all__ = [
    "CholeskyFactor",
    "UDFactor",
    "SVDFactor",
    "triangularize",
    "mwgs",
    "ud_decompose",
    "svd_post_arrays",
    "tri_solve",
    "cov_sqrt_upper",
]

# Weights this small would blow up the Gram-Schmidt divisions.
MIN_MWGS_WEIGHT = 1e-300


@dataclass
class CholeskyFactor:
    """Upper-triangular square root ``s`` of a symmetric matrix, ``A = s.T @ s``."""

    s: np.ndarray

    @classmethod
    def from_matrix(cls, a):
        return cls(cov_sqrt_upper(a))

    def reconstruct(self):
        return self.s.T @ self.s

    @property
    def is_finite(self):
        return bool(np.isfinite(self.s).all())


@dataclass
class UDFactor:
    """Modified Cholesky factors: unit upper-triangular ``u`` and diagonal ``d``."""

    u: np.ndarray
    d: np.ndarray

    @classmethod
    def from_matrix(cls, a):
        return cls(*ud_decompose(a))

    def reconstruct(self):
        return (self.u * self.d) @ self.u.T

    @property
    def is_finite(self):
        return bool(np.isfinite(self.u).all() and np.isfinite(self.d).all())


@dataclass
class SVDFactor:
    """Spectral factors: orthogonal ``v`` and square-rooted singular values."""

    v: np.ndarray
    dsqrt: np.ndarray

    @classmethod
    def from_matrix(cls, a):
        a = check_symmetric(a, "matrix")
        eigvals, vecs = np.linalg.eigh(a)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.clip(eigvals[order], 0.0, None)
        return cls(_normalize_column_signs(vecs[:, order]), np.sqrt(eigvals))

    def reconstruct(self):
        return (self.v * self.dsqrt**2) @ self.v.T

    @property
    def is_finite(self):
        return bool(np.isfinite(self.v).all() and np.isfinite(self.dsqrt).all())


def triangularize(pre_array):
    """Map a pre-array to its upper-triangular post-array.

    Applies an orthogonal transform to ``pre_array`` (r x s, r >= s) and
    returns the s x s upper-triangular ``R`` with
    ``R.T @ R == pre_array.T @ pre_array``.  Rows are sign-flipped so the
    diagonal is nonnegative, which makes the result deterministic.

    Rank-deficient input yields zero diagonal entries, not an error.
    """
    a = np.asarray(pre_array, dtype=float)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ValueError(f"pre-array must have at least as many rows as columns, got {a.shape}")
    post = np.linalg.qr(a, mode="r")
    signs = np.sign(np.diagonal(post)).copy()
    signs[signs == 0.0] = 1.0
    return post * signs[:, None]


def mwgs(a_transpose, weights):
    """Backward modified weighted Gram-Schmidt orthogonalization.

    Given the transposed pre-array ``a_transpose`` (s x r, r >= s) and strictly
    positive ``weights`` (length r), computes a unit upper-triangular ``b``
    (s x s) and a nonnegative diagonal ``d_b`` such that::

        b @ diag(d_b) @ b.T == a_transpose @ diag(weights) @ a_transpose.T

    Rows are orthogonalized last-first so the triangular factor comes out
    unit *upper* triangular.

    Raises
    ------
    InvalidWeightError
        If any weight is below ``MIN_MWGS_WEIGHT`` or not finite.
    """
    a = np.asarray(a_transpose, dtype=float)
    w = np.asarray(weights, dtype=float)
    if a.ndim != 2:
        raise ValueError("a_transpose must be a matrix")
    s, r = a.shape
    if r < s:
        raise ValueError(f"need at least as many columns as rows, got {a.shape}")
    if w.shape != (r,):
        raise ValueError(f"weights must have length {r}, got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < MIN_MWGS_WEIGHT):
        raise InvalidWeightError(
            f"MWGS weights must be finite and >= {MIN_MWGS_WEIGHT:g}"
        )

    v = a.copy()
    b = np.eye(s)
    d = np.zeros(s)
    for i in range(s - 1, -1, -1):
        wv = w * v[i]
        d[i] = float(v[i] @ wv)
        if i == 0:
            break
        if d[i] != 0.0:
            coeffs = (v[:i] @ wv) / d[i]
            b[:i, i] = coeffs
            v[:i] -= np.outer(coeffs, v[i])
        # d[i] == 0 means v[i] is exactly zero; nothing to project out.
    return b, d


def ud_decompose(p):
    """Factor a symmetric positive (semi-)definite matrix as ``U diag(d) U.T``.

    Uses the backward (last-column-first) recursion so ``u`` is unit upper
    triangular.  An exactly zero pivot is accepted when its column is also
    exactly zero (positive semi-definite corner cases); any other nonpositive
    pivot raises :class:`DecompositionError` naming the pivot index.
    """
    c = check_symmetric(p, "matrix").copy()
    n = c.shape[0]
    u = np.eye(n)
    d = np.zeros(n)
    for j in range(n - 1, -1, -1):
        pivot = c[j, j]
        if pivot < 0.0 or (pivot == 0.0 and c[:j, j].any()):
            raise DecompositionError(
                f"matrix is not positive definite: pivot {j} is {pivot:g}", pivot=j
            )
        d[j] = pivot
        if j == 0:
            break
        if pivot != 0.0:
            u[:j, j] = c[:j, j] / pivot
            c[:j, :j] -= np.outer(u[:j, j], c[:j, j])
    return u, d


def svd_post_arrays(pre_array):
    """Extract SVD post-arrays from a pre-array (r x s, r >= s).

    Returns ``(dsqrt, v)`` with ``dsqrt`` the singular values in descending
    order and ``v`` the right singular vectors, so that
    ``v @ diag(dsqrt**2) @ v.T == pre_array.T @ pre_array``.  Columns of ``v``
    are sign-normalized (largest-magnitude entry positive) for determinism.
    Zero singular values are permitted.
    """
    a = np.asarray(pre_array, dtype=float)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ValueError(f"pre-array must have at least as many rows as columns, got {a.shape}")
    _, sv, vh = np.linalg.svd(a, full_matrices=False)
    return sv, _normalize_column_signs(vh.T)


def tri_solve(t, rhs, lower=False, trans=False, unit_diagonal=False):
    """Solve ``t @ x = rhs`` (or ``t.T @ x = rhs`` when ``trans``) for triangular ``t``.

    Raises :class:`SingularFactorError` if a diagonal entry is exactly zero
    (unit-diagonal solves skip the check).
    """
    t = np.asarray(t, dtype=float)
    if not unit_diagonal and np.any(np.diagonal(t) == 0.0):
        raise SingularFactorError("triangular factor has a zero diagonal entry")
    return solve_triangular(
        t,
        rhs,
        lower=lower,
        trans="T" if trans else "N",
        unit_diagonal=unit_diagonal,
        check_finite=False,
    )


def cov_sqrt_upper(a):
    """Upper-triangular ``S`` with ``S.T @ S == a`` for symmetric PSD ``a``.

    Positive definite input takes the Cholesky fast path.  Semi-definite
    input falls back to an eigendecomposition square root re-triangularized
    by QR, so the result keeps the upper-triangular convention.
    """
    a = np.asarray(a, dtype=float)
    try:
        return np.linalg.cholesky(a).T
    except np.linalg.LinAlgError:
        pass
    a = check_symmetric(a, "matrix")
    eigvals, vecs = np.linalg.eigh(a)
    scale = 1.0 + np.abs(eigvals).max(initial=0.0)
    if eigvals.min(initial=0.0) < -1e-10 * scale:
        raise DecompositionError("matrix is not positive semi-definite")
    root = np.sqrt(np.clip(eigvals, 0.0, None))[:, None] * vecs.T
    return triangularize(root)


def _normalize_column_signs(v):
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0.0] = 1.0
    return v * signs
