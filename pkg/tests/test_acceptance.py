"""Acceptance suite: ten property-based criteria at desk scale.

Each test prints one PASS/FAIL line (also repeated in the terminal summary)
before asserting.
"""

import time

import numpy as np

from ridge_equality import (
    DispersionBlocks,
    ModelTruth,
    PerturbationSpec,
    RidgeSpec,
    assemble_dispersion,
    build_equalizing_dispersion,
    check_estimator_equality,
    check_rss_equality,
    classify_ranks,
    decompose_dispersion,
    epsilon_bound,
    exact_discrepancy,
    first_order_expansion,
    general_ridge_estimate,
    mc_oracle,
    solve_gamma,
    validate_design,
)
from ridge_equality.generators import (
    commuting_pair,
    noncommuting_pair,
    random_design,
    random_orthogonal,
    random_psd,
    random_rao_omega,
    random_rao_violating_blocks,
    random_rao_violating_omega,
    random_spd,
)
from ridge_equality.linalg import rank_with_tol, rel_diff


def _rng(criterion):
    return np.random.default_rng(1000 + criterion)


def _shape(rng):
    k = int(rng.integers(1, 6))
    return k + int(rng.integers(1, 8)), k


def _estimator_deviation(d, omega, K1, K2, ys):
    s1, s2 = RidgeSpec.explicit(omega, K1), RidgeSpec.identity(K2)
    return max(rel_diff(general_ridge_estimate(d, s1, y), general_ridge_estimate(d, s2, y)) for y in ys)


def test_criterion_01_soundness(record_criterion):
    rng = _rng(1)
    worst = 0.0
    for _ in range(100):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        K1, K2 = commuting_pair(rng, d, rank=int(rng.integers(0, k + 1)))
        omega = build_equalizing_dispersion(d, K1, K2, random_spd(rng, k), random_spd(rng, n - k))
        worst = max(worst, _estimator_deviation(d, omega, K1, K2, rng.standard_normal((10, n))))
    ok = worst <= 1e-8
    record_criterion(1, "equalizing dispersions give equal estimators", ok, f"max rel discrepancy {worst:.2e}")
    assert ok


def test_criterion_02_completeness(record_criterion):
    rng = _rng(2)
    failures = 0
    weakest = np.inf
    ratios = []
    for _ in range(100):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        omega, blocks = random_rao_violating_omega(rng, d, min_ratio=0.05)
        ratios.append(np.linalg.norm(blocks.xi) / np.linalg.norm(omega))
        K1, K2 = random_psd(rng, k, k), random_psd(rng, k, k)
        cert = check_estimator_equality(d, omega, K1, K2)
        dev = _estimator_deviation(d, omega, K1, K2, rng.standard_normal((10, n)))
        weakest = min(weakest, dev)
        failures += cert.equal or dev < 1e-6
    ok = failures == 0 and min(ratios) >= 0.05
    record_criterion(2, "non-Rao dispersions are rejected", ok, f"{failures} failures, min probe discrepancy {weakest:.2e}")
    assert ok


def test_criterion_03_gamma_existence(record_criterion):
    rng = _rng(3)
    worst, bad_exists, bad_absent = 0.0, 0, 0
    for _ in range(100):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        K1, K2 = commuting_pair(rng, d, rank=int(rng.integers(1, k + 1)))
        sol = solve_gamma(d, K1, K2)
        bad_exists += not sol.exists
        if sol.exists:
            for h in (None, random_spd(rng, k), random_spd(rng, k, cond=1e3)):
                g = sol.gamma_of(h)
                worst = max(worst, np.linalg.norm(d.gram @ g @ K1 - K2) / np.linalg.norm(K2))
    for _ in range(100):
        k = int(rng.integers(2, 6))
        d = random_design(rng, k + int(rng.integers(1, 8)), k)
        K1, K2 = noncommuting_pair(rng, d)
        bad_absent += solve_gamma(d, K1, K2).exists
    ok = bad_exists == 0 and bad_absent == 0 and worst <= 1e-8
    record_criterion(
        3, "Gamma exists iff whitened pair shares range and commutes", ok,
        f"missed {bad_exists}, false positives {bad_absent}, max residual {worst:.2e}",
    )
    assert ok


def _rao_search_family(rng, d):
    """Rao-form dispersions: random, Gamma = (X'X)^-1, Delta = I, scalar, and near-identity."""
    k, m = d.k, d.n - d.k
    zero = np.zeros((k, m))
    yield random_rao_omega(rng, d)[0]
    yield assemble_dispersion(d, DispersionBlocks(d.gram_inv, random_spd(rng, m), zero))
    yield assemble_dispersion(d, DispersionBlocks(random_spd(rng, k), np.eye(m), zero))
    yield float(rng.uniform(0.2, 5.0)) * np.eye(d.n)
    for delta in (1e-1, 1e-3, 1e-5):
        g = d.gram_inv + delta * random_psd(rng, k, k)
        dl = np.eye(m) + delta * random_psd(rng, m, m)
        yield assemble_dispersion(d, DispersionBlocks(g, dl, zero))
        yield assemble_dispersion(d, DispersionBlocks(g, np.eye(m), zero))
        yield assemble_dispersion(d, DispersionBlocks(d.gram_inv, dl, zero))


def test_criterion_04_identity_only(record_criterion):
    rng = _rng(4)
    violations, identity_misses, searched = 0, 0, 0
    for lam in (0.1, 1.0, 10.0):
        for _ in range(10):
            n, k = _shape(rng)
            d = random_design(rng, n, k)
            K = lam * np.eye(k)
            cert = check_rss_equality(d, np.eye(n), K, K)
            identity_misses += not (cert.estimator_equal and cert.rss_equal)
            for omega in _rao_search_family(rng, d):
                searched += 1
                cert = check_rss_equality(d, omega, K, K)
                near_identity = rel_diff(omega, np.eye(n)) <= 1e-8
                violations += cert.estimator_equal and cert.rss_equal and not near_identity
    ok = violations == 0 and identity_misses == 0
    record_criterion(
        4, "scalar ridge: estimators and GRSS equal only at identity", ok,
        f"{searched} dispersions searched, {violations} violations, {identity_misses} identity misses",
    )
    assert ok


def _expansion_config(rng):
    n, k = _shape(rng)
    d = random_design(rng, n, k)
    omega, _ = random_rao_violating_omega(rng, d)
    return d, omega, random_psd(rng, k, k), random_psd(rng, k, k), rng.standard_normal(k)


def test_criterion_05_second_order_remainder(record_criterion):
    rng = _rng(5)
    slopes = []
    for _ in range(20):
        d, omega, L1, L2, beta = _expansion_config(rng)
        bound = epsilon_bound(d, omega, L1, L2)
        eps0 = 0.1 * bound
        grid = np.array([eps0, eps0 / 2, eps0 / 4])
        errs = {"dif": [], "diff": []}
        for eps in grid:
            rep = first_order_expansion(d, omega, PerturbationSpec(L1, L2, eps, bound), 1.0, beta)
            errs["dif"].append(np.linalg.norm(rep.dif - rep.dif_order0 - eps * rep.dif_order1))
            errs["diff"].append(np.linalg.norm(rep.diff_mse - rep.diff_order0 - eps * rep.diff_order1))
        for vals in errs.values():
            slopes.append(np.polyfit(np.log(grid), np.log(vals), 1)[0])
    ok = all(1.7 <= s <= 2.3 for s in slopes)
    record_criterion(5, "first-order remainder is O(eps^2)", ok, f"slopes in [{min(slopes):.3f}, {max(slopes):.3f}]")
    assert ok


def test_criterion_06_rank_identity(record_criterion):
    rng = _rng(6)
    failures, seen = 0, set()
    for i in range(100):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        kind = i % 3
        if kind == 0:
            omega = random_spd(rng, n, cond=100.0)
        elif kind == 1:
            omega = random_rao_omega(rng, d)[0]
        else:
            # coupling of prescribed rank r
            b = random_rao_violating_blocks(rng, d)
            r = int(rng.integers(0, min(k, n - k) + 1))
            u, s, vt = np.linalg.svd(b.xi)
            xi = (u[:, :r] * s[:r]) @ vt[:r]
            omega = assemble_dispersion(d, DispersionBlocks(b.gamma, b.delta, xi))
        om_inv = np.linalg.inv(omega)
        xz = np.linalg.norm(d.X) * np.linalg.norm(d.Z)
        r_fwd = rank_with_tol(d.X.T @ omega @ d.Z, scale=xz * np.linalg.norm(omega))
        r_inv = rank_with_tol(d.X.T @ om_inv @ d.Z, scale=xz * np.linalg.norm(om_inv))
        failures += r_fwd != r_inv
        seen.add(r_fwd)
    ok = failures == 0
    record_criterion(6, "rank(X'Omega Z) = rank(X'Omega^-1 Z)", ok, f"{failures} mismatches, ranks seen {sorted(seen)}")
    assert ok


def test_criterion_07_monte_carlo(record_criterion):
    rng = _rng(7)
    start = time.perf_counter()
    worst = 0.0
    for i in range(10):
        d, omega, L1, L2, beta = _expansion_config(rng)
        bound = epsilon_bound(d, omega, L1, L2)
        K1, K2 = 0.3 * bound * L1, 0.3 * bound * L2
        truth = ModelTruth.create(beta, float(rng.uniform(0.5, 2.0)), omega)
        est, se = mc_oracle(d, omega, K1, K2, truth, draws=200_000, seed=i)
        exact, _ = exact_discrepancy(d, omega, K1, K2, truth)
        worst = max(worst, np.abs(est - exact).max() / se)
    elapsed = time.perf_counter() - start
    ok = worst <= 4.0 and elapsed <= 30.0
    record_criterion(7, "closed-form dif matches Monte Carlo", ok, f"max {worst:.2f} SE, {elapsed:.1f} s")
    assert ok


def test_criterion_08_rank_examples(record_criterion):
    rng = _rng(8)
    mismatches = 0
    for _ in range(50):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        K1 = random_psd(rng, k, int(rng.integers(0, k + 1)))
        r = int(rng.integers(0, k + 1))
        w = random_orthogonal(rng, k)[:, :r] * rng.uniform(0.5, 2.0, size=r)
        mismatches += classify_ranks(d, np.eye(n), K1, K1 + w @ w.T) != (0, r)
    zero_bad = scalar_bad = 0
    for _ in range(20):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        z = np.zeros((k, k))
        omega = random_spd(rng, n)
        zero_bad += classify_ranks(d, omega, z, z)[1] != 0
        lam1, lam2 = rng.uniform(0.1, 5.0, size=2)
        scalar_bad += classify_ranks(d, np.eye(n), lam1 * np.eye(k), lam2 * np.eye(k)) != (0, k)
    ok = mismatches == 0 and zero_bad == 0 and scalar_bad == 0
    record_criterion(
        8, "rank classification examples", ok,
        f"identity {mismatches}/50, zero ridge {zero_bad}/20, scalar ridges {scalar_bad}/20 mismatches",
    )
    assert ok


def test_criterion_09_structure_roundtrip(record_criterion):
    rng = _rng(9)
    worst = {"decompose(assemble)": 0.0, "assemble(decompose)": 0.0, "information": 0.0}
    for _ in range(100):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        blocks = random_rao_violating_blocks(rng, d, coupling=float(rng.uniform(0.0, 0.9)))
        back = decompose_dispersion(d, assemble_dispersion(d, blocks))
        worst["decompose(assemble)"] = max(
            worst["decompose(assemble)"],
            rel_diff(back.gamma, blocks.gamma), rel_diff(back.delta, blocks.delta), rel_diff(back.xi, blocks.xi),
        )
        omega = random_spd(rng, n, cond=100.0)
        b = decompose_dispersion(d, omega)
        worst["assemble(decompose)"] = max(worst["assemble(decompose)"], rel_diff(assemble_dispersion(d, b), omega))
        info = np.linalg.inv(d.X.T @ np.linalg.solve(omega, d.X))
        worst["information"] = max(worst["information"], rel_diff(info, b.schur))
    ok = max(worst.values()) <= 1e-8
    record_criterion(9, "block roundtrips and information identity", ok,
                     ", ".join(f"{key} {v:.1e}" for key, v in worst.items()))
    assert ok


def test_criterion_10_unit_determinant(record_criterion):
    rng = _rng(10)
    worst = 0.0
    for _ in range(20):
        n, k = _shape(rng)
        d = random_design(rng, n, k)
        K1, K2 = commuting_pair(rng, d)
        omega = build_equalizing_dispersion(
            d, K1, K2, random_spd(rng, k), random_spd(rng, n - k), normalize_det=True
        )
        sign, logdet = np.linalg.slogdet(omega)
        worst = max(worst, abs(sign * np.exp(logdet) - 1.0))
    ok = worst <= 1e-8
    record_criterion(10, "normalized equalizing dispersion has unit determinant", ok, f"max |det - 1| {worst:.2e}")
    assert ok
