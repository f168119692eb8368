"""Deciding and constructing equality of ``beta_hat(Omega, K1)`` and
``beta_hat(I, K2)``, alone and together with equality of their generalized
residual sums of squares.

Every verdict derived from the structural conditions is compared with a
direct evaluation of the two estimators. A clear disagreement raises
:class:`~ridge_equality.errors.ConsistencyError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError
from .estimators import coefficient_matrix, general_ridge_estimate, grss
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    check_psd,
    check_spd,
    norm,
    pinv,
    rel_diff,
    spd_logdet,
    spd_solve,
    subspace_tests,
    symmetrize,
)
from .model import Design, RidgeSpec
from .structure import (
    CROSS_CHECK_BAND,
    DispersionBlocks,
    assemble_dispersion,
    decompose_dispersion,
    required_delta_det,
)


@dataclass(frozen=True)
class EqualityCertificate:
    """Verdict on ``beta_hat(Omega, K1) == beta_hat(I, K2)`` for all ``y``.

    ``xi_residual`` is ``||Xi||`` relative to ``||(X'X)^-1 X'|| ||Omega|| ||Z||``;
    ``condition_residual`` is the relative residual of ``X'X Gamma K1 = K2``;
    ``operational_residual`` compares the two coefficient matrices directly.
    """

    equal: bool
    xi_residual: float
    condition_residual: float
    operational_residual: float


def _check_pair(d: Design, K1, K2, tol: Tolerances) -> tuple[np.ndarray, np.ndarray]:
    return check_psd(K1, "K1", tol, size=d.k), check_psd(K2, "K2", tol, size=d.k)


def _cross_check(label: str, verdict: bool, structural: float, operational: float, tol: Tolerances) -> None:
    band = CROSS_CHECK_BAND * tol.eq_rel
    if verdict and operational > band:
        raise ConsistencyError(f"{label}: conditions hold but direct comparison differs by {operational:.3e}")
    if not verdict and structural > band and operational <= tol.eq_rel:
        raise ConsistencyError(
            f"{label}: conditions fail (residual {structural:.3e}) but direct comparison agrees ({operational:.3e})"
        )


def check_estimator_equality(d: Design, omega, K1, K2, tol: Tolerances = DEFAULT_TOLERANCES) -> EqualityCertificate:
    om = check_spd(omega, "omega", tol, size=d.n)
    k1, k2 = _check_pair(d, K1, K2, tol)
    blocks = decompose_dispersion(d, om, tol)
    xi_res = norm(blocks.xi) / (norm(d.projector_coef) * norm(om) * norm(d.Z))
    cond_res = rel_diff(d.gram @ blocks.gamma @ k1, k2)
    c_omega = coefficient_matrix(d, RidgeSpec(k1, om))
    c_ident = coefficient_matrix(d, RidgeSpec(k2))
    op_res = rel_diff(c_omega, c_ident)
    equal = xi_res <= tol.eq_rel and cond_res <= tol.eq_rel
    _cross_check("estimator equality", equal, max(xi_res, cond_res), op_res, tol)
    return EqualityCertificate(equal, xi_res, cond_res, op_res)


@dataclass(frozen=True, eq=False)
class GammaSolution:
    """Solutions ``Gamma`` of ``X'X Gamma K1 = K2`` in whitened coordinates.

    ``kbar1, kbar2`` are ``(X'X)^{-1/2} K_i (X'X)^{-1/2}``. When ``exists`` is
    true, :meth:`gamma_of` maps any SPD ``H`` to an SPD solution, and every
    SPD solution arises this way.
    """

    kbar1: np.ndarray
    kbar2: np.ndarray
    exists: bool
    design: Design = field(repr=False)
    K1: np.ndarray = field(repr=False)
    K2: np.ndarray = field(repr=False)
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def gamma_of(self, H=None) -> np.ndarray:
        d, tol = self.design, self.tol
        if not self.exists:
            raise ValidationError("no SPD Gamma satisfies X'X Gamma K1 = K2 for these K1, K2")
        h = np.eye(d.k) if H is None else check_spd(H, "H", tol, size=d.k)
        k1_pinv = pinv(self.kbar1, tol)
        comp = np.eye(d.k) - self.kbar1 @ k1_pinv
        gbar = symmetrize(self.kbar2 @ k1_pinv + comp @ h @ comp)
        _, isqrt = d.gram_sqrt_pair
        gamma = symmetrize(isqrt @ gbar @ isqrt)
        try:
            check_spd(gamma, "Gamma", tol)
        except Exception as exc:
            raise ConsistencyError(f"constructed Gamma is not SPD: {exc}") from None
        res = rel_diff(d.gram @ gamma @ self.K1, self.K2)
        if res > tol.eq_rel:
            raise ConsistencyError(f"constructed Gamma violates X'X Gamma K1 = K2 (residual {res:.3e})")
        return gamma


def solve_gamma(d: Design, K1, K2, tol: Tolerances = DEFAULT_TOLERANCES) -> GammaSolution:
    k1, k2 = _check_pair(d, K1, K2, tol)
    _, isqrt = d.gram_sqrt_pair
    kbar1 = symmetrize(isqrt @ k1 @ isqrt)
    kbar2 = symmetrize(isqrt @ k2 @ isqrt)
    range_equal, commute = subspace_tests(kbar1, kbar2, tol)
    return GammaSolution(kbar1, kbar2, range_equal and commute, d, k1, k2, tol)


def build_equalizing_dispersion(
    d: Design,
    K1,
    K2,
    H=None,
    delta=None,
    normalize_det: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Construct ``Omega = X Gamma X' + Z Delta Z'`` for which the two
    estimators coincide.

    ``Gamma`` is ``solve_gamma(...).gamma_of(H)``. With ``normalize_det``,
    ``delta`` is rescaled so that ``det(Omega) = 1``; that needs positive
    definite ``K1`` and ``K2``. ``H`` and ``delta`` default to identities.
    """
    sol = solve_gamma(d, K1, K2, tol)
    gamma = sol.gamma_of(H)
    m = d.n - d.k
    dl = np.eye(m) if delta is None else check_spd(delta, "delta", tol, size=m)
    if normalize_det:
        target = np.log(required_delta_det(d, sol.K1, sol.K2, tol))
        dl = dl * np.exp((target - spd_logdet(dl, "delta")) / m)
    omega = assemble_dispersion(d, DispersionBlocks(gamma, dl, np.zeros((d.k, m))), tol)
    if not check_estimator_equality(d, omega, sol.K1, sol.K2, tol).equal:
        raise ConsistencyError("constructed dispersion does not equalize the estimators")
    return omega


def residual_operator(d: Design, K2) -> np.ndarray:
    """``B = I - X (X'X + K2)^-1 X'``, so that ``y - X beta_hat(I, K2) = B y``."""
    k2 = check_psd(K2, "K2", size=d.k)
    return symmetrize(np.eye(d.n) - d.X @ spd_solve(d.gram + k2, d.X.T, "X'X + K2"))


@dataclass(frozen=True, eq=False)
class RssCertificate:
    """Verdict on simultaneous equality of estimators and of their GRSS.

    ``residuals`` holds relative residuals keyed by condition:
    ``dispersion_form`` (``Omega = X Gamma X' + Z (Z'Z)^-1 Z'``),
    ``ridge_condition`` (``X'X Gamma K1 = K2``), ``quartic_condition``
    (``X'BX {A - (X'X)^-1} X'BX = 0``), ``quartic_factored`` (the same
    condition in factored form), and the direct probe comparisons
    ``operational_estimator`` and ``operational_rss``.
    """

    estimator_equal: bool
    rss_equal: bool
    A: np.ndarray
    B: np.ndarray
    residuals: dict


def probe_vectors(n: int, count: int = 10, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((count, n))


def check_rss_equality(
    d: Design,
    omega,
    K1,
    K2,
    tol: Tolerances = DEFAULT_TOLERANCES,
    probes: int = 10,
    seed: int = 0,
) -> RssCertificate:
    om = check_spd(omega, "omega", tol, size=d.n)
    k1, k2 = _check_pair(d, K1, K2, tol)
    est = check_estimator_equality(d, om, k1, k2, tol)
    blocks = decompose_dispersion(d, om, tol)
    M, M_inv = d.gram, d.gram_inv
    gamma_inv = spd_solve(blocks.gamma, np.eye(d.k), "Gamma")
    A = symmetrize(M_inv @ gamma_inv @ M_inv)
    B = residual_operator(d, k2)

    z_part = d.Z @ np.linalg.solve(d.Z.T @ d.Z, d.Z.T)
    form_res = rel_diff(om, d.X @ blocks.gamma @ d.X.T + z_part)

    xbx = d.X.T @ B @ d.X
    quartic = xbx @ (A - M_inv) @ xbx
    quartic_res = norm(quartic) / (norm(M) ** 2 * (norm(A) + norm(M_inv)))
    left = np.eye(d.k) - M @ spd_solve(M + k2, np.eye(d.k), "X'X + K2")
    factored = left @ (gamma_inv - M) @ left.T
    factored_res = norm(factored) / (max(1.0, norm(left)) ** 2 * (norm(gamma_inv) + norm(M)))
    if (quartic_res <= tol.eq_rel) != (factored_res <= tol.eq_rel) and (
        max(quartic_res, factored_res) > CROSS_CHECK_BAND * tol.eq_rel
    ):
        raise ConsistencyError(
            f"quartic condition forms disagree: {quartic_res:.3e} vs factored {factored_res:.3e}"
        )

    rss_equal = est.equal and form_res <= tol.eq_rel and quartic_res <= tol.eq_rel

    spec_omega, spec_ident = RidgeSpec(k1, om), RidgeSpec(k2)
    est_dev = rss_dev = 0.0
    for y in probe_vectors(d.n, probes, seed):
        est_dev = max(
            est_dev,
            rel_diff(general_ridge_estimate(d, spec_omega, y), general_ridge_estimate(d, spec_ident, y)),
        )
        g1, g2 = grss(d, spec_omega, y), grss(d, spec_ident, y)
        scale = max(abs(g1), abs(g2))
        rss_dev = max(rss_dev, abs(g1 - g2) / scale if scale > 0 else 0.0)
    _cross_check(
        "estimator and RSS equality",
        rss_equal,
        max(est.xi_residual, est.condition_residual, form_res, quartic_res),
        max(est_dev, rss_dev),
        tol,
    )
    residuals = {
        "dispersion_form": form_res,
        "ridge_condition": est.condition_residual,
        "quartic_condition": quartic_res,
        "quartic_factored": factored_res,
        "operational_estimator": est_dev,
        "operational_rss": rss_dev,
    }
    return RssCertificate(est.equal, rss_equal, A, B, residuals)
