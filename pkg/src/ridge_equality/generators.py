"""Random instance generators for tests and experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Design, validate_design
from .structure import DispersionBlocks, assemble_dispersion

# rows (1,0), (0,1), (1,1), (1,-1); X'X = 3I
X_REF = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]])


@dataclass(frozen=True)
class InstanceConfig:
    n: int = 8
    k: int = 3
    cond: float = 10.0
    seed: int = 0

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def random_orthogonal(rng: np.random.Generator, m: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def random_spd(rng: np.random.Generator, m: int, cond: float = 10.0, scale: float = 1.0) -> np.ndarray:
    """SPD matrix with eigenvalues log-uniform in ``[scale / cond, scale]``."""
    q = random_orthogonal(rng, m)
    w = scale * np.exp(rng.uniform(-np.log(cond), 0.0, size=m))
    return (q * w) @ q.T


def random_psd(rng: np.random.Generator, m: int, rank: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((m, rank)) * np.sqrt(scale / max(rank, 1))
    return g @ g.T


def random_design(rng: np.random.Generator, n: int, k: int) -> Design:
    return validate_design(rng.standard_normal((n, k)))


def random_rao_violating_blocks(
    rng: np.random.Generator, d: Design, coupling: float = 0.7, cond: float = 10.0
) -> DispersionBlocks:
    """Blocks with ``Xi = Gamma^{1/2} U Delta^{1/2}``, ``||U||_2 = coupling < 1``.

    The Schur complement ``Gamma^{1/2} (I - U U') Gamma^{1/2}`` is PD, so the
    assembled dispersion is PD.
    """
    m = d.n - d.k
    gamma = random_spd(rng, d.k, cond)
    delta = random_spd(rng, m, cond)
    u = rng.standard_normal((d.k, m))
    u *= coupling / np.linalg.norm(u, 2)
    wg, vg = np.linalg.eigh(gamma)
    wd, vd = np.linalg.eigh(delta)
    xi = ((vg * np.sqrt(wg)) @ vg.T) @ u @ ((vd * np.sqrt(wd)) @ vd.T)
    return DispersionBlocks(gamma, delta, xi)


def random_rao_violating_omega(
    rng: np.random.Generator, d: Design, min_ratio: float = 0.05, cond: float = 10.0
) -> tuple[np.ndarray, DispersionBlocks]:
    """Dispersion with ``||Xi|| / ||Omega|| >= min_ratio`` (Frobenius norms)."""
    while True:
        blocks = random_rao_violating_blocks(rng, d, coupling=rng.uniform(0.3, 0.9), cond=cond)
        omega = assemble_dispersion(d, blocks)
        if np.linalg.norm(blocks.xi) / np.linalg.norm(omega) >= min_ratio:
            return omega, blocks


def random_rao_omega(rng: np.random.Generator, d: Design, cond: float = 10.0) -> tuple[np.ndarray, DispersionBlocks]:
    blocks = DispersionBlocks(random_spd(rng, d.k, cond), random_spd(rng, d.n - d.k, cond), np.zeros((d.k, d.n - d.k)))
    return assemble_dispersion(d, blocks), blocks


def commuting_pair(rng: np.random.Generator, d: Design, rank: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(K1, K2)`` whose whitened forms share an eigenbasis and a range."""
    k = d.k
    r = k if rank is None else rank
    v = random_orthogonal(rng, k)[:, :r]
    d1 = np.exp(rng.uniform(-1.0, 1.0, size=r))
    d2 = np.exp(rng.uniform(-1.0, 1.0, size=r))
    root, _ = d.gram_sqrt_pair
    k1 = root @ ((v * d1) @ v.T) @ root
    k2 = root @ ((v * d2) @ v.T) @ root
    return 0.5 * (k1 + k1.T), 0.5 * (k2 + k2.T)


def noncommuting_pair(rng: np.random.Generator, d: Design) -> tuple[np.ndarray, np.ndarray]:
    """Generic PD pair; whitened forms fail to commute with probability one."""
    return random_spd(rng, d.k, 10.0), random_spd(rng, d.k, 10.0)
