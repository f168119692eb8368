"""Discrepancy between ``beta_hat(I, K2)`` and ``beta_hat(Omega, K1)``.

``dif`` is the second-moment matrix of the difference of the two
estimators and ``diff_mse`` the difference of their MSE matrices. For
small ridge matrices ``K_i = eps * L_i`` both expand as

    order0 + eps * order1 + O(eps^2)

with a shared leading term ``sigma2 * Xi Delta^-1 Xi'``. The ranks
``v1 = rank(Xi)`` and ``v2`` (rank of the first-order MSE coefficient at
``K1, K2``) classify dispersion matrices.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NotPositiveDefiniteError, ValidationError
from .estimators import coefficient_matrix, estimator_moments
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    check_psd,
    check_spd,
    norm,
    rank_with_tol,
    rel_diff,
    symmetrize,
)
from .model import Design, ModelTruth, RidgeSpec
from .structure import DispersionBlocks, decompose_dispersion


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """Ridge directions ``L1, L2`` scaled by ``eps``; requires ``eps < bound``.

    Use :meth:`for_dispersion` to fill in ``bound`` from
    :func:`epsilon_bound`.
    """

    L1: np.ndarray
    L2: np.ndarray
    eps: float
    bound: float = math.inf

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValidationError(f"eps must be positive and finite, got {self.eps!r}")
        if not self.bound > 0:
            raise ValidationError(f"bound must be positive, got {self.bound!r}")
        if not self.eps < self.bound:
            raise ValidationError(f"eps={self.eps!r} must be below the admissibility bound {self.bound!r}")

    @classmethod
    def for_dispersion(cls, d: Design, omega, L1, L2, eps: float, tol: Tolerances = DEFAULT_TOLERANCES):
        bound = epsilon_bound(d, omega, L1, L2, tol)
        return cls(check_psd(L1, "L1", tol, size=d.k), check_psd(L2, "L2", tol, size=d.k), float(eps), bound)


@dataclass(frozen=True, eq=False)
class DiscrepancyReport:
    """Exact and first-order discrepancy terms plus the ranks ``(v1, v2)``.

    ``dif`` and ``diff_mse`` are the exact values at ``K_i = eps * L_i``;
    they are ``None`` when no true ``beta`` was supplied, since the bias part
    depends on it.
    """

    dif: np.ndarray | None
    diff_mse: np.ndarray | None
    dif_order0: np.ndarray
    dif_order1: np.ndarray
    diff_order0: np.ndarray
    diff_order1: np.ndarray
    v1: int
    v2: int
    eps: float
    bound: float


def second_step_matrix(d: Design, blocks: DispersionBlocks, K1, K2) -> np.ndarray:
    """``(X'X)^-1 K2 Gamma + Gamma K2 (X'X)^-1 - 2 S K1 S`` with ``S = Gamma - Xi Delta^-1 Xi'``.

    Symmetrized; it is symmetric in exact arithmetic.
    """
    s = blocks.schur
    a = d.gram_inv @ K2 @ blocks.gamma
    return symmetrize(a + a.T - 2.0 * s @ K1 @ s)


def _second_step_scale(d: Design, blocks: DispersionBlocks, K1, K2) -> float:
    s = blocks.schur
    return 2.0 * norm(d.gram_inv) * norm(K2) * norm(blocks.gamma) + 2.0 * norm(s) ** 2 * norm(K1)


def classify_ranks(d: Design, omega, K1, K2, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[int, int]:
    """Two-step classification ranks ``(v1, v2)``.

    ``v1 = rank(X' Omega Z)``, cross-checked against ``rank(X' Omega^-1 Z)``;
    ``v2`` is the rank of :func:`second_step_matrix`. Each rank uses a
    cutoff relative to the magnitude of the factors the matrix is built from.
    """
    om = check_spd(omega, "omega", tol, size=d.n)
    k1 = check_psd(K1, "K1", tol, size=d.k)
    k2 = check_psd(K2, "K2", tol, size=d.k)
    xz = norm(d.X) * norm(d.Z)
    v1 = rank_with_tol(d.X.T @ om @ d.Z, tol, scale=xz * norm(om))
    om_inv = np.linalg.inv(om)
    v1_inv = rank_with_tol(d.X.T @ om_inv @ d.Z, tol, scale=xz * norm(om_inv))
    if v1 != v1_inv:
        raise ConsistencyError(f"rank(X'Omega Z) = {v1} but rank(X'Omega^-1 Z) = {v1_inv}")
    blocks = decompose_dispersion(d, om, tol)
    v2 = rank_with_tol(second_step_matrix(d, blocks, k1, k2), tol, scale=_second_step_scale(d, blocks, k1, k2))
    return v1, v2


def _truth_for(d: Design, omega: np.ndarray, truth: ModelTruth, tol: Tolerances) -> None:
    truth.check_against(d)
    if rel_diff(truth.omega, omega) > tol.eq_rel:
        raise ValidationError("truth.omega differs from the dispersion used by the estimator")


def exact_discrepancy(d: Design, omega, K1, K2, truth: ModelTruth, tol: Tolerances = DEFAULT_TOLERANCES):
    """Closed-form ``(dif, diff_mse)``.

    ``dif = sigma2 D Omega D' + (D X beta)(D X beta)'`` with ``D`` the
    difference of the two coefficient matrices; ``diff_mse`` is
    ``MSE(beta_hat(I, K2)) - MSE(beta_hat(Omega, K1))``.
    """
    om = check_spd(omega, "omega", tol, size=d.n)
    k1 = check_psd(K1, "K1", tol, size=d.k)
    k2 = check_psd(K2, "K2", tol, size=d.k)
    _truth_for(d, om, truth, tol)
    spec_omega, spec_ident = RidgeSpec(k1, om), RidgeSpec(k2)
    D = coefficient_matrix(d, spec_ident) - coefficient_matrix(d, spec_omega)
    mean_diff = D @ (d.X @ truth.beta)
    dif = symmetrize(truth.sigma2 * D @ om @ D.T + np.outer(mean_diff, mean_diff))
    diff_mse = estimator_moments(d, spec_ident, truth).mse - estimator_moments(d, spec_omega, truth).mse
    return dif, symmetrize(diff_mse)


def epsilon_bound(d: Design, omega, L1, L2, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``1 / max(||S L1||, ||(X'X)^-1 L2||)`` in the spectral norm; ``inf`` if both vanish."""
    om = check_spd(omega, "omega", tol, size=d.n)
    l1 = check_psd(L1, "L1", tol, size=d.k)
    l2 = check_psd(L2, "L2", tol, size=d.k)
    s = decompose_dispersion(d, om, tol).schur
    worst = max(np.linalg.norm(s @ l1, 2), np.linalg.norm(d.gram_inv @ l2, 2))
    return math.inf if worst == 0.0 else float(1.0 / worst)


def first_order_expansion(
    d: Design,
    omega,
    spec: PerturbationSpec,
    sigma2: float,
    beta=None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DiscrepancyReport:
    om = check_spd(omega, "omega", tol, size=d.n)
    l1 = check_psd(spec.L1, "L1", tol, size=d.k)
    l2 = check_psd(spec.L2, "L2", tol, size=d.k)
    sigma2 = float(sigma2)
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be positive, got {sigma2!r}")
    bound = epsilon_bound(d, om, l1, l2, tol)
    if not spec.eps < bound:
        raise ValidationError(f"eps={spec.eps!r} exceeds the admissibility bound {bound!r}")
    blocks = decompose_dispersion(d, om, tol)
    lead = blocks.leading
    order0 = sigma2 * lead
    t = lead @ l2 @ d.gram_inv
    dif_order1 = -sigma2 * symmetrize(t + t.T)
    diff_order1 = -sigma2 * second_step_matrix(d, blocks, l1, l2)
    v1, v2 = classify_ranks(d, om, spec.eps * l1, spec.eps * l2, tol)
    dif = diff_mse = None
    if beta is not None:
        truth = ModelTruth.create(beta, sigma2, om, tol)
        dif, diff_mse = exact_discrepancy(d, om, spec.eps * l1, spec.eps * l2, truth, tol)
    return DiscrepancyReport(dif, diff_mse, order0, dif_order1, order0.copy(), diff_order1, v1, v2, spec.eps, bound)


_CHUNK = 16_384


def _stream_sums(D, mean_diff, chol, sigma, draws, seed_seq):
    rng = np.random.default_rng(seed_seq)
    k = D.shape[0]
    s1 = np.zeros((k, k))
    s2 = np.zeros((k, k))
    for start in range(0, draws, _CHUNK):
        m = min(_CHUNK, draws - start)
        noise = rng.standard_normal((m, chol.shape[0])) @ chol.T
        diffs = mean_diff + sigma * (noise @ D.T)
        outer = diffs[:, :, None] * diffs[:, None, :]
        s1 += outer.sum(axis=0)
        s2 += (outer**2).sum(axis=0)
    return s1, s2


def mc_oracle(
    d: Design,
    omega,
    K1,
    K2,
    truth: ModelTruth,
    draws: int = 200_000,
    seed: int = 0,
    streams: int = 1,
    workers: int = 1,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, float]:
    """Monte Carlo estimate of ``dif`` from Gaussian draws of ``y``.

    Draws are split into ``streams`` independent generators spawned from
    ``seed``; stream sums are merged in stream order, so for a fixed
    ``streams`` the result is bit-identical whatever ``workers`` is.

    Returns
    -------
    dif_hat : ndarray, shape (k, k)
        Sample mean of the outer product of the estimator difference.
    stderr : float
        Largest entrywise standard error of ``dif_hat``.
    """
    if draws < 1000:
        raise ValidationError(f"draws must be >= 1000, got {draws}")
    if streams < 1 or workers < 1:
        raise ValidationError("streams and workers must be >= 1")
    om = np.asarray(omega, dtype=np.float64)
    try:
        chol = np.linalg.cholesky(symmetrize(om))
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("omega has no Cholesky factor") from None
    om = check_spd(om, "omega", tol, size=d.n)
    k1 = check_psd(K1, "K1", tol, size=d.k)
    k2 = check_psd(K2, "K2", tol, size=d.k)
    _truth_for(d, om, truth, tol)
    D = coefficient_matrix(d, RidgeSpec(k2)) - coefficient_matrix(d, RidgeSpec(k1, om))
    mean_diff = D @ (d.X @ truth.beta)
    sigma = math.sqrt(truth.sigma2)

    sizes = [draws // streams + (1 if i < draws % streams else 0) for i in range(streams)]
    seeds = np.random.SeedSequence(seed).spawn(streams)
    jobs = [(D, mean_diff, chol, sigma, m, s) for m, s in zip(sizes, seeds) if m > 0]
    if workers == 1:
        parts = [_stream_sums(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _stream_sums(*job), jobs))
    total = np.zeros((d.k, d.k))
    total_sq = np.zeros((d.k, d.k))
    for s1, s2 in parts:
        total += s1
        total_sq += s2
    mean = total / draws
    var = np.maximum(total_sq / draws - mean**2, 0.0) * draws / (draws - 1)
    stderr = float(np.sqrt(var.max() / draws))
    return symmetrize(mean), stderr
