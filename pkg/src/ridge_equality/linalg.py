"""Dense matrix primitives with explicit tolerances.

Every function here is a pure function of its arguments. Matrix equality is
always judged relative to operand norms; ranks come from singular values.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError, SingularSystemError, ValidationError

ENV_PREFIX = "RIDGE_EQUALITY_"


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs used throughout the package.

    Attributes
    ----------
    rank_rel : float
        Singular values at or below ``rank_rel * scale`` count as zero, where
        ``scale`` is the largest singular value (or a caller-supplied floor).
    eq_rel : float
        Two matrices are equal when their difference is at most ``eq_rel``
        times the size of the operands.
    pd_min : float
        A symmetric matrix is accepted as positive definite when its smallest
        eigenvalue exceeds ``pd_min``.
    """

    rank_rel: float = 1e-10
    eq_rel: float = 1e-8
    pd_min: float = 1e-12

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
                raise ValidationError(f"tolerance {field.name} must be finite and >= 0, got {value!r}")

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None, **overrides) -> "Tolerances":
        """Build tolerances from ``RIDGE_EQUALITY_{RANK,EQ,PD}_TOL``.

        Keyword overrides that are not ``None`` take precedence over the
        environment, which takes precedence over the defaults.
        """
        environ = os.environ if environ is None else environ
        values = {}
        for name, var in (("rank_rel", "RANK_TOL"), ("eq_rel", "EQ_TOL"), ("pd_min", "PD_TOL")):
            raw = environ.get(ENV_PREFIX + var)
            if raw is not None and raw.strip():
                try:
                    values[name] = float(raw)
                except ValueError:
                    raise ValidationError(f"{ENV_PREFIX + var}={raw!r} is not a number") from None
            if overrides.get(name) is not None:
                values[name] = float(overrides[name])
        return cls(**values)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite float64 2-D array or raise ValidationError."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    v = np.asarray(a, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    return v


def as_square(a, name: str = "matrix", size: int | None = None) -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if size is not None and m.shape[0] != size:
        raise ValidationError(f"{name} must be {size}x{size}, got shape {m.shape}")
    return m


def norm(a) -> float:
    """Frobenius norm; the default size measure for residuals."""
    return float(np.linalg.norm(a))


def rel_diff(a, b) -> float:
    """``||a - b|| / max(||a||, ||b||)``, with 0 when both are zero."""
    scale = max(norm(a), norm(b))
    if scale == 0.0:
        return 0.0
    return norm(np.asarray(a) - np.asarray(b)) / scale


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def is_symmetric(a: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return norm(a - a.T) <= tol.eq_rel * norm(a)


def min_eigenvalue(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(symmetrize(a))[0])


def check_spd(a, name: str = "matrix", tol: Tolerances = DEFAULT_TOLERANCES, size: int | None = None) -> np.ndarray:
    """Validate a symmetric positive definite matrix and return its symmetric part."""
    m = as_square(a, name, size)
    if not is_symmetric(m, tol):
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    m = symmetrize(m)
    lo = min_eigenvalue(m)
    if not lo > tol.pd_min:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (min eigenvalue {lo:.3e} <= {tol.pd_min:.1e})", lo
        )
    return m


def check_psd(a, name: str = "matrix", tol: Tolerances = DEFAULT_TOLERANCES, size: int | None = None) -> np.ndarray:
    """Validate a symmetric positive semidefinite matrix.

    Eigenvalues down to ``-eq_rel * ||a||`` are accepted as rounding noise.
    """
    m = as_square(a, name, size)
    if not is_symmetric(m, tol):
        raise ValidationError(f"{name} is not symmetric")
    m = symmetrize(m)
    if m.size and min_eigenvalue(m) < -tol.eq_rel * norm(m):
        raise ValidationError(f"{name} is not positive semidefinite")
    return m


def spd_solve(a: np.ndarray, b: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a`` by Cholesky."""
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        cond = np.linalg.cond(a)
        raise SingularSystemError(f"{name} is not numerically positive definite (condition {cond:.3e})", cond) from None
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def spd_logdet(a: np.ndarray, name: str = "matrix") -> float:
    sign, logdet = np.linalg.slogdet(a)
    if sign <= 0:
        raise NotPositiveDefiniteError(f"{name} has non-positive determinant")
    return float(logdet)


def pinv(M, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Moore-Penrose inverse via the SVD.

    Singular values at or below ``tol.rank_rel * sigma_max`` are treated as
    zero; the zero matrix maps to the zero matrix of transposed shape.
    """
    m = as_matrix(M, "M")
    if m.size == 0:
        return np.zeros(m.shape[::-1])
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    cutoff = tol.rank_rel * (s[0] if s.size else 0.0)
    keep = s > cutoff
    if not np.any(keep):
        return np.zeros(m.shape[::-1])
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def rank_with_tol(M, tol: Tolerances = DEFAULT_TOLERANCES, scale: float | None = None) -> int:
    """Number of singular values above ``tol.rank_rel * max(sigma_max, scale)``.

    ``scale`` is a floor for the reference magnitude. Pass the size of the
    quantities a matrix was computed from, so that a result which is zero
    up to rounding is not promoted to full rank by the relative cutoff.
    """
    m = as_matrix(M, "M")
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    ref = max(float(s[0]), 0.0 if scale is None else float(scale))
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * ref))


def null_space_basis(M, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal basis of the null space of a full-row-rank ``k x n`` matrix.

    Columns are oriented so that the first coordinate of magnitude above
    ``tol.eq_rel`` is positive, which makes the output reproducible.
    """
    m = as_matrix(M, "M")
    k, n = m.shape
    if k >= n:
        raise ValidationError(f"null space of a {k}x{n} matrix with k >= n is empty")
    if rank_with_tol(m, tol) != k:
        raise ValidationError(f"matrix of shape {m.shape} is rank deficient")
    _, _, vt = np.linalg.svd(m, full_matrices=True)
    z = vt[k:].T.copy()
    for j in range(z.shape[1]):
        col = z[:, j]
        lead = np.flatnonzero(np.abs(col) > tol.eq_rel * np.abs(col).max())[0]
        if col[lead] < 0:
            z[:, j] = -col
    return z


def sym_sqrt_pair(M, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root of an SPD matrix together with its inverse."""
    m = check_spd(M, "M", tol)
    w, v = np.linalg.eigh(m)
    root = np.sqrt(w)
    s = symmetrize((v * root) @ v.T)
    s_inv = symmetrize((v / root) @ v.T)
    return s, s_inv


def subspace_tests(A, B, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[bool, bool]:
    """Return ``(range_equal, commute)`` for two symmetric PSD matrices.

    ``range_equal`` holds when ``rank(A) == rank(B) == rank([A | B])``;
    ``commute`` when ``||AB - BA|| <= eq_rel * ||A|| * ||B||``.
    """
    a = as_square(A, "A")
    b = as_square(B, "B")
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    ra = rank_with_tol(a, tol)
    rb = rank_with_tol(b, tol)
    rab = rank_with_tol(np.hstack([a, b]), tol)
    range_equal = ra == rb == rab
    commute = norm(a @ b - b @ a) <= tol.eq_rel * norm(a) * norm(b)
    return range_equal, commute
