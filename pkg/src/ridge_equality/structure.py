"""Block coordinates of a dispersion matrix relative to a design.

Any symmetric ``Omega`` can be written as

    Omega = X Gamma X' + Z Delta Z' + X Xi Z' + Z Xi' X'

with ``Gamma`` (k x k), ``Delta`` ((n-k) x (n-k)) and ``Xi`` (k x (n-k)).
``Xi = 0`` is the condition under which OLS and GLS coincide. ``Delta``
and ``Xi`` depend on the basis ``Z`` held by the :class:`Design`, which is
orthonormal, so ``Z'Z = I`` in every formula below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NotPositiveDefiniteError, ValidationError
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    check_psd,
    check_spd,
    min_eigenvalue,
    norm,
    spd_logdet,
    spd_solve,
    symmetrize,
)
from .model import Design


@dataclass(frozen=True, eq=False)
class DispersionBlocks:
    gamma: np.ndarray
    delta: np.ndarray
    xi: np.ndarray

    @property
    def schur(self) -> np.ndarray:
        """``Gamma - Xi Delta^-1 Xi'``, which equals ``(X' Omega^-1 X)^-1``."""
        return symmetrize(self.gamma - self.xi @ spd_solve(self.delta, self.xi.T, "delta"))

    @property
    def leading(self) -> np.ndarray:
        """``Xi Delta^-1 Xi'``."""
        return symmetrize(self.xi @ spd_solve(self.delta, self.xi.T, "delta"))


def _z_gram_inv(d: Design) -> np.ndarray:
    return np.linalg.inv(d.Z.T @ d.Z)


def decompose_dispersion(d: Design, omega, tol: Tolerances = DEFAULT_TOLERANCES) -> DispersionBlocks:
    om = check_spd(omega, "omega", tol, size=d.n)
    p = d.projector_coef
    q = _z_gram_inv(d) @ d.Z.T
    return DispersionBlocks(
        gamma=symmetrize(p @ om @ p.T),
        delta=symmetrize(q @ om @ q.T),
        xi=p @ om @ q.T,
    )


def assemble_dispersion(d: Design, blocks: DispersionBlocks, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Rebuild ``Omega`` from its blocks; fails loudly if the result is not PD."""
    gamma = check_spd(blocks.gamma, "gamma", tol, size=d.k)
    delta = check_spd(blocks.delta, "delta", tol, size=d.n - d.k)
    xi = np.asarray(blocks.xi, dtype=np.float64)
    if xi.shape != (d.k, d.n - d.k):
        raise ValidationError(f"xi must have shape {(d.k, d.n - d.k)}, got {xi.shape}")
    X, Z = d.X, d.Z
    cross = X @ xi @ Z.T
    om = symmetrize(X @ gamma @ X.T + Z @ delta @ Z.T + cross + cross.T)
    lo = min_eigenvalue(om)
    if not lo > tol.pd_min:
        raise NotPositiveDefiniteError(
            f"assembled dispersion is not positive definite (min eigenvalue {lo:.3e}); xi is inadmissible", lo
        )
    return om


def rao_form_residuals(d: Design, omega, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Relative sizes of ``X' Omega^-1 Z`` and of ``Xi``.

    The first is scaled by ``||X|| ||Omega^-1|| ||Z||``, the second by
    ``||(X'X)^-1 X'|| ||Omega|| ||Z||``; both are at most 1.
    """
    om = check_spd(omega, "omega", tol, size=d.n)
    om_inv = np.linalg.inv(om)
    via_inverse = norm(d.X.T @ om_inv @ d.Z) / (norm(d.X) * norm(om_inv) * norm(d.Z))
    xi = decompose_dispersion(d, om, tol).xi
    via_blocks = norm(xi) / (norm(d.projector_coef) * norm(om) * norm(d.Z))
    return via_inverse, via_blocks


# Cross-checks only fail when one route is inside tolerance and the other is
# outside this multiple of it; in between the two scalings legitimately differ.
CROSS_CHECK_BAND = 1e3


def is_rao_form(d: Design, omega, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True when ``X' Omega^-1 Z = 0``, equivalently ``Xi = 0``."""
    via_inverse, via_blocks = rao_form_residuals(d, omega, tol)
    a = via_inverse <= tol.eq_rel
    b = via_blocks <= tol.eq_rel
    if a != b and max(via_inverse, via_blocks) > CROSS_CHECK_BAND * tol.eq_rel:
        raise ConsistencyError(
            f"Rao-form routes disagree: ||X'Omega^-1 Z|| rel {via_inverse:.3e}, ||Xi|| rel {via_blocks:.3e}"
        )
    return a


def rao_inverse(d: Design, gamma, delta, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Closed-form inverse of ``X Gamma X' + Z Delta Z'``."""
    g = check_spd(gamma, "gamma", tol, size=d.k)
    dl = check_spd(delta, "delta", tol, size=d.n - d.k)
    p = d.projector_coef
    q = _z_gram_inv(d) @ d.Z.T
    return symmetrize(p.T @ spd_solve(g, p, "gamma") + q.T @ spd_solve(dl, q, "delta"))


def log_basis_det_sq(d: Design) -> float:
    """``log(det([X | Z])^2)``."""
    sign, logdet = np.linalg.slogdet(d.basis)
    return 2.0 * float(logdet)


def required_delta_det(d: Design, K1, K2, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``det(Delta)`` making the equalizing dispersion have unit determinant.

    Only defined for positive definite ``K1`` and ``K2``; computed as
    ``det(X'X) det(K1) / (det([X|Z])^2 det(K2))`` in log space.
    """
    k1 = check_psd(K1, "K1", tol, size=d.k)
    k2 = check_psd(K2, "K2", tol, size=d.k)
    for name, m in (("K1", k1), ("K2", k2)):
        lo = min_eigenvalue(m)
        if not lo > tol.pd_min:
            raise NotPositiveDefiniteError(f"{name} must be positive definite for det normalization", lo)
    log_value = spd_logdet(d.gram, "X'X") + spd_logdet(k1, "K1") - log_basis_det_sq(d) - spd_logdet(k2, "K2")
    return float(np.exp(log_value))
