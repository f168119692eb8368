"""Tabulate the (v1, v2) classification over families of dispersion matrices
and ridge pairs, together with the estimator / GRSS equality verdicts.

    python3 scripts/classification_demo.py --n 8 --k 3 --seed 1
"""

from __future__ import annotations

import argparse

import numpy as np

from ridge_equality import build_equalizing_dispersion, check_rss_equality, classify_ranks
from ridge_equality.generators import (
    InstanceConfig,
    commuting_pair,
    random_design,
    random_rao_omega,
    random_rao_violating_omega,
    random_spd,
)


def cases(cfg: InstanceConfig):
    rng = cfg.rng()
    d = random_design(rng, cfg.n, cfg.k)
    k, n = d.k, d.n
    K1, K2 = commuting_pair(rng, d)
    lam = np.eye(k)
    yield "identity, K1 = K2 = I", d, np.eye(n), lam, lam
    yield "identity, I vs 2I", d, np.eye(n), lam, 2 * lam
    yield "identity, zero ridge", d, np.eye(n), 0 * lam, 0 * lam
    yield "Rao form, K1 = K2 = I", d, random_rao_omega(rng, d, cfg.cond)[0], lam, lam
    yield "non-Rao, K1 = K2 = I", d, random_rao_violating_omega(rng, d, cond=cfg.cond)[0], lam, lam
    yield "non-Rao, zero ridge", d, random_rao_violating_omega(rng, d, cond=cfg.cond)[0], 0 * lam, 0 * lam
    omega = build_equalizing_dispersion(d, K1, K2, random_spd(rng, k), random_spd(rng, n - k))
    yield "equalizing, commuting pair", d, omega, K1, K2
    yield "equalizing, Delta = I", d, build_equalizing_dispersion(d, K1, K2, random_spd(rng, k)), K1, K2
    yield "equalizing, unit determinant", d, build_equalizing_dispersion(d, K1, K2, normalize_det=True), K1, K2


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--cond", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    cfg = InstanceConfig(a.n, a.k, a.cond, a.seed)
    print(f"{'case':<30} {'v1':>3} {'v2':>3} {'estimators':>11} {'est + GRSS':>11}")
    for label, d, omega, K1, K2 in cases(cfg):
        v1, v2 = classify_ranks(d, omega, K1, K2)
        cert = check_rss_equality(d, omega, K1, K2)
        print(f"{label:<30} {v1:>3} {v2:>3} {str(cert.estimator_equal):>11} {str(cert.rss_equal):>11}")


if __name__ == "__main__":
    main()
