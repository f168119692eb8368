"""Sweep eps over a geometric grid and report the remainder of the
first-order discrepancy expansion, with its log-log slope.

    python3 scripts/perturbation_sweep.py --configs 5 --n 10 --k 3
"""

from __future__ import annotations

import argparse
import dataclasses

import numpy as np

from ridge_equality import PerturbationSpec, epsilon_bound, first_order_expansion
from ridge_equality.generators import InstanceConfig, random_design, random_psd, random_rao_violating_omega


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    instance: InstanceConfig = InstanceConfig()
    configs: int = 5
    points: int = 6
    start_fraction: float = 0.2
    sigma2: float = 1.0


def run(cfg: SweepConfig) -> list[dict]:
    rng = cfg.instance.rng()
    rows = []
    for c in range(cfg.configs):
        d = random_design(rng, cfg.instance.n, cfg.instance.k)
        omega, _ = random_rao_violating_omega(rng, d, cond=cfg.instance.cond)
        L1, L2 = random_psd(rng, d.k, d.k), random_psd(rng, d.k, d.k)
        beta = rng.standard_normal(d.k)
        bound = epsilon_bound(d, omega, L1, L2)
        grid = cfg.start_fraction * bound / 2.0 ** np.arange(cfg.points)
        err_dif, err_diff = [], []
        for eps in grid:
            rep = first_order_expansion(d, omega, PerturbationSpec(L1, L2, eps, bound), cfg.sigma2, beta)
            err_dif.append(np.linalg.norm(rep.dif - rep.dif_order0 - eps * rep.dif_order1))
            err_diff.append(np.linalg.norm(rep.diff_mse - rep.diff_order0 - eps * rep.diff_order1))
        rows.append(
            {
                "config": c,
                "bound": bound,
                "v1": rep.v1,
                "v2": rep.v2,
                "slope_dif": np.polyfit(np.log(grid), np.log(err_dif), 1)[0],
                "slope_diff": np.polyfit(np.log(grid), np.log(err_diff), 1)[0],
            }
        )
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--cond", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--configs", type=int, default=5)
    p.add_argument("--points", type=int, default=6)
    a = p.parse_args()
    cfg = SweepConfig(InstanceConfig(a.n, a.k, a.cond, a.seed), a.configs, a.points)
    print(f"{'config':>6} {'bound':>10} {'v1':>3} {'v2':>3} {'slope DIF':>10} {'slope DIFF':>10}")
    for r in run(cfg):
        print(f"{r['config']:>6} {r['bound']:>10.4g} {r['v1']:>3} {r['v2']:>3} {r['slope_dif']:>10.3f} {r['slope_diff']:>10.3f}")


if __name__ == "__main__":
    main()
