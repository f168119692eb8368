"""Validated value types for the general linear model ``y = X beta + e``,
``Cov(e) = sigma2 * Omega``, and for general ridge estimator specifications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_matrix,
    as_vector,
    check_psd,
    check_spd,
    norm,
    null_space_basis,
    rank_with_tol,
    sym_sqrt_pair,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Design:
    """A full-column-rank design ``X`` with a fixed orthonormal complement ``Z``.

    ``Z`` spans the orthogonal complement of ``range(X)`` and satisfies
    ``Z.T @ Z = I``. Everything that depends on the choice of ``Z`` (the
    ``delta`` and ``xi`` dispersion blocks in particular) is expressed in
    this basis.
    """

    X: np.ndarray
    Z: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """``X.T @ X``."""
        return _frozen(self.X.T @ self.X)

    @cached_property
    def gram_inv(self) -> np.ndarray:
        return _frozen(np.linalg.solve(self.gram, np.eye(self.k)))

    @cached_property
    def gram_sqrt_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """``((X.T X)^{1/2}, (X.T X)^{-1/2})``."""
        s, s_inv = sym_sqrt_pair(self.gram)
        return _frozen(s), _frozen(s_inv)

    @cached_property
    def projector_coef(self) -> np.ndarray:
        """``(X.T X)^{-1} X.T``, the OLS coefficient map."""
        return _frozen(np.linalg.solve(self.gram, self.X.T))

    @cached_property
    def basis(self) -> np.ndarray:
        """The nonsingular ``n x n`` matrix ``[X | Z]``."""
        return _frozen(np.hstack([self.X, self.Z]))


def validate_design(X, tol: Tolerances = DEFAULT_TOLERANCES, Z=None) -> Design:
    """Check ``X`` and attach the canonical complement ``Z``.

    Parameters
    ----------
    X : array_like, shape (n, k)
        Design matrix with ``n > k >= 1`` and full column rank.
    tol : Tolerances
    Z : array_like, optional
        An explicit orthonormal complement. Defaults to
        ``null_space_basis(X.T)``.
    """
    x = as_matrix(X, "X")
    n, k = x.shape
    if k < 1 or n <= k:
        raise ValidationError(f"design must satisfy n > k >= 1, got n={n}, k={k}")
    if rank_with_tol(x, tol) != k:
        raise ValidationError("X is rank deficient")
    if Z is None:
        z = null_space_basis(x.T, tol)
    else:
        z = as_matrix(Z, "Z")
        if z.shape != (n, n - k):
            raise ValidationError(f"Z must have shape {(n, n - k)}, got {z.shape}")
        if norm(z.T @ z - np.eye(n - k)) > tol.eq_rel * np.sqrt(n - k):
            raise ValidationError("Z must have orthonormal columns")
    if norm(x.T @ z) > tol.eq_rel * norm(x) * norm(z):
        raise ValidationError("X.T @ Z is not zero")
    if rank_with_tol(z, tol) != n - k:
        raise ValidationError("Z is rank deficient")
    return Design(_frozen(x), _frozen(z))


@dataclass(frozen=True, eq=False)
class ModelTruth:
    """True parameters ``(beta, sigma2, omega)`` of the model."""

    beta: np.ndarray
    sigma2: float
    omega: np.ndarray

    @classmethod
    def create(cls, beta, sigma2, omega, tol: Tolerances = DEFAULT_TOLERANCES) -> "ModelTruth":
        b = as_vector(beta, "beta")
        s2 = float(sigma2)
        if not np.isfinite(s2) or s2 <= 0:
            raise ValidationError(f"sigma2 must be positive, got {sigma2!r}")
        om = check_spd(omega, "omega", tol)
        return cls(_frozen(b), s2, _frozen(om))

    def check_against(self, d: Design) -> None:
        if self.beta.shape != (d.k,):
            raise ValidationError(f"beta must have length {d.k}, got {self.beta.shape}")
        if self.omega.shape != (d.n, d.n):
            raise ValidationError(f"omega must be {d.n}x{d.n}, got {self.omega.shape}")


@dataclass(frozen=True, eq=False)
class RidgeSpec:
    """One general ridge estimator ``(X' Psi^-1 X + K)^-1 X' Psi^-1 y``.

    ``psi=None`` is the identity weighting and is handled symbolically; no
    ``n x n`` identity is ever formed.
    """

    K: np.ndarray
    psi: np.ndarray | None = field(default=None)

    @classmethod
    def identity(cls, K, tol: Tolerances = DEFAULT_TOLERANCES) -> "RidgeSpec":
        return cls(_frozen(check_psd(K, "K", tol)))

    @classmethod
    def explicit(cls, psi, K, tol: Tolerances = DEFAULT_TOLERANCES) -> "RidgeSpec":
        return cls(_frozen(check_psd(K, "K", tol)), _frozen(check_spd(psi, "psi", tol)))

    @property
    def is_identity(self) -> bool:
        return self.psi is None

    def check_against(self, d: Design) -> None:
        if self.K.shape != (d.k, d.k):
            raise ValidationError(f"K must be {d.k}x{d.k}, got {self.K.shape}")
        if self.psi is not None and self.psi.shape != (d.n, d.n):
            raise ValidationError(f"psi must be {d.n}x{d.n}, got {self.psi.shape}")
