"""General ridge estimators, generalized residual sums of squares, and
closed-form first and second moments.

Note on shrinkage: ``(X'X + rho X'X)^-1 X'y`` equals ``OLS / (1 + rho)``,
i.e. the shrinkage factor is ``1 / (1 + rho)`` rather than ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError, ValidationError
from .linalg import as_vector, spd_solve, symmetrize
from .model import Design, ModelTruth, RidgeSpec


@dataclass(frozen=True, eq=False)
class EstimatorMoments:
    """Mean, covariance and mean-square-error matrix of an estimator."""

    mean: np.ndarray
    cov: np.ndarray
    mse: np.ndarray


def _weighted_design(d: Design, spec: RidgeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Psi^-1 X, X' Psi^-1 X)``."""
    if spec.is_identity:
        return d.X, d.gram
    w = spd_solve(spec.psi, d.X, "psi")
    return w, symmetrize(d.X.T @ w)


def _normal_matrix(d: Design, spec: RidgeSpec) -> tuple[np.ndarray, np.ndarray]:
    spec.check_against(d)
    w, g = _weighted_design(d, spec)
    return w, g + spec.K


def _solve_normal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return spd_solve(a, b, "X' Psi^-1 X + K")
    except SingularSystemError as exc:
        raise SingularSystemError(
            f"ridge normal matrix is singular (condition estimate {exc.condition:.3e})", exc.condition
        ) from None


def coefficient_matrix(d: Design, spec: RidgeSpec) -> np.ndarray:
    """The ``k x n`` linear map ``y -> beta_hat`` of the estimator."""
    w, a = _normal_matrix(d, spec)
    return _solve_normal(a, w.T)


def general_ridge_estimate(d: Design, spec: RidgeSpec, y) -> np.ndarray:
    """Evaluate ``(X' Psi^-1 X + K)^-1 X' Psi^-1 y``."""
    y = _check_y(d, y)
    w, a = _normal_matrix(d, spec)
    return _solve_normal(a, w.T @ y)


def grss(d: Design, spec: RidgeSpec, y) -> float:
    """Generalized residual sum of squares ``r' Psi^-1 r`` with ``r = y - X beta_hat``."""
    y = _check_y(d, y)
    r = y - d.X @ general_ridge_estimate(d, spec, y)
    if spec.is_identity:
        return float(r @ r)
    return max(float(r @ spd_solve(spec.psi, r, "psi")), 0.0)


def estimator_moments(d: Design, spec: RidgeSpec, truth: ModelTruth) -> EstimatorMoments:
    """Exact mean, covariance and MSE matrix under ``truth``.

    The covariance is ``sigma2 * C Omega C'`` with ``C`` the coefficient
    matrix, and ``mse = cov + bias bias'``.
    """
    truth.check_against(d)
    w, a = _normal_matrix(d, spec)
    c = _solve_normal(a, w.T)
    mean = c @ (d.X @ truth.beta)
    cov = truth.sigma2 * symmetrize(c @ truth.omega @ c.T)
    bias = mean - truth.beta
    return EstimatorMoments(mean, cov, cov + np.outer(bias, bias))


def _check_y(d: Design, y) -> np.ndarray:
    y = as_vector(y, "y")
    if y.shape != (d.n,):
        raise ValidationError(f"y must have length {d.n}, got {y.shape}")
    return y
