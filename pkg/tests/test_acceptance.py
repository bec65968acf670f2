"""Acceptance criteria, each run at its stated size and tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from martingale_bounds.cli import main
from martingale_bounds.core import bernoulli_kl, kl_inv_lower, kl_inv_upper, pinsker_radius, refined_kl_upper
from martingale_bounds.individual import (
    bernstein_adaptive,
    bernstein_fixed_lambda,
    hoeffding_azuma_radius,
    kl_drift_bound,
)
from martingale_bounds.oracle import (
    bernstein_suite,
    comparison_suite,
    exact_mgf_sweep,
    hoeffding_suite,
    scalar_inequality_checks,
)
from martingale_bounds.pac_bayes import (
    HypothesisSummary,
    pb_bernstein_adaptive,
    pb_bernstein_fixed_lambda,
    pb_ha_fixed_lambda,
    pb_kl_bound,
    pb_pinsker_bound,
)
from martingale_bounds.simulation import ScenarioSpec, coverage_experiment

pytestmark = pytest.mark.slow


def record(number: int, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_exact_mgf_sweep():
    start = time.perf_counter()
    rep = exact_mgf_sweep(2000)
    elapsed = time.perf_counter() - start
    ok = rep["upper_bound_passed"] and rep["sqrt_band_passed"] and elapsed < 60
    record(
        1,
        ok,
        f"max E[e^(n kl)]/(n+1) = {rep['max_value_over_n_plus_1']:.15g} at {rep['argmax']}, "
        f"sqrt-band failures {rep['sqrt_band_failures']}, {elapsed:.1f}s",
    )
    assert rep["upper_bound_passed"]
    assert rep["sqrt_band_passed"], rep["sqrt_band_examples"]
    assert elapsed < 60


def test_criterion_2_comparison_catalog():
    start = time.perf_counter()
    results = comparison_suite(ns=(4, 8, 12), mc_samples=1_000_000, seed=0)
    elapsed = time.perf_counter() - start
    failed = [r for r in results if not r.passed]
    ok = not failed and elapsed < 300
    record(
        2,
        ok,
        f"{len(results) - len(failed)}/{len(results)} comparison checks within 4se, "
        f"min slack {min(r.slack for r in results):.3g}, {elapsed:.1f}s",
    )
    assert not failed, [r.params for r in failed]
    assert elapsed < 300


COVERAGE_CASES = [
    (ScenarioSpec.iid_bernoulli(0.1, 100), ("kl-drift", "hoeffding-azuma", "bernstein")),
    (ScenarioSpec.iid_bernoulli(0.5, 100), ("kl-drift", "hoeffding-azuma", "bernstein")),
    (ScenarioSpec.iid_bernoulli(0.9, 100), ("kl-drift", "hoeffding-azuma", "bernstein")),
    (ScenarioSpec.dependent_bounded(0.4, 0.5, 100), ("kl-drift", "hoeffding-azuma", "bernstein")),
    (ScenarioSpec.mds_bounded(-0.3, 0.7, 100, shape="adaptive"), ("hoeffding-azuma", "bernstein")),
]


def test_criterion_3_individual_coverage():
    rows = []
    for spec, bounds in COVERAGE_CASES:
        rep = coverage_experiment(spec, bound_id=bounds, delta=0.05, trials=10_000, master_seed=7)
        rows.extend((spec.kind, spec.b if spec.kind != "mds_bounded" else None, b) for b in rep.bounds)
    ok = all(b.passed for _, _, b in rows)
    worst = max(rows, key=lambda r: r[2].violation_rate)
    record(
        3,
        ok,
        f"{sum(b.passed for _, _, b in rows)}/{len(rows)} bound/scenario pairs within band "
        f"{worst[2].band:.4f}; worst {worst[2].bound_id} on {worst[0]} rate {worst[2].violation_rate:.4f}",
    )
    for kind, b, cov in rows:
        assert cov.passed, (kind, b, cov.to_dict())


def test_criterion_4_pac_bayes_coverage():
    spec = ScenarioSpec.iw_sampling(np.round(np.linspace(0.1, 0.9, 5), 12), 0.1, 100, adaptive=True)
    rep = coverage_experiment(
        spec, bound_id=("pb-kl", "pb-bernstein"), delta=0.05, trials=2000, master_seed=7, gibbs_gamma=5.0
    )
    ok = rep.passed
    record(
        4,
        ok,
        ", ".join(f"{b.bound_id} rate {b.violation_rate:.4f}" for b in rep.bounds)
        + f" (band {rep.bounds[0].band:.4f}, any-rho violations over uniform, point masses, Gibbs)",
    )
    for cov in rep.bounds:
        assert cov.passed, cov.to_dict()


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def test_criterion_5_collapse():
    rng = np.random.default_rng(2024)
    mismatches = []
    for trial in range(100):
        n = int(rng.integers(1, 2000))
        delta = float(rng.uniform(0.001, 0.5))
        c = float(rng.uniform(1.01, 3.0))
        K = float(rng.uniform(0.5, 3.0))
        S = float(rng.uniform(0, n))
        V = float(rng.uniform(0, K * K * n))
        widths = rng.uniform(0.1, 2.0, n)
        ranges = (-widths / 2, widths / 2)
        lam = float(rng.uniform(1e-3, 1.0 / K))
        s = HypothesisSummary(n=n, S=[S], M=[0.0], V=[V], ranges=ranges, K=K)
        one = np.array([1.0])
        kl_ind = kl_drift_bound(S, n, delta)
        kl_pb = pb_kl_bound(s, one, one, delta)
        lam_ha = math.sqrt(8 * math.log(2 / delta) / math.fsum(widths**2))
        pairs = {
            "kl radius": (kl_pb.radius, kl_ind.radius),
            "kl lower": (kl_pb.lower, kl_ind.lower),
            "kl upper": (kl_pb.upper, kl_ind.upper),
            "pinsker": (pb_pinsker_bound(s, one, one, delta).radius, pinsker_radius(kl_ind.radius)),
            "hoeffding-azuma": (
                pb_ha_fixed_lambda(s, one, one, lam_ha, delta).radius,
                hoeffding_azuma_radius(ranges, delta).radius,
            ),
            "bernstein fixed": (
                pb_bernstein_fixed_lambda(s, one, one, lam, delta).radius,
                bernstein_fixed_lambda(V, lam, delta, K).radius,
            ),
            "bernstein adaptive": (
                pb_bernstein_adaptive(s, one, one, delta, c).radius,
                bernstein_adaptive(V, K, n, delta, c).radius,
            ),
        }
        for name, (a, b) in pairs.items():
            if not _close(a, b):
                mismatches.append((trial, name, a, b))
    record(5, not mismatches, f"700 pairs over 100 parameterizations, {len(mismatches)} beyond 1e-12")
    assert not mismatches, mismatches[:5]


def test_criterion_6_crossover():
    n, delta = 100, 0.05
    eps = math.log((n + 1) / delta) / n
    ha = hoeffding_azuma_radius((np.full(n, -0.5), np.full(n, 0.5)), delta).radius / n
    below = {}
    for q in (0.01, 0.05, 0.10, 0.5):
        below[q] = refined_kl_upper(q, eps) < q + ha
    ok = below[0.01] and below[0.05] and below[0.10] and not below[0.5]
    record(
        6,
        ok,
        "refined endpoint below Hoeffding-Azuma endpoint at S_n/n = "
        + ", ".join(f"{q}: {v}" for q, v in below.items())
        + f" (refined deviation >= 2 eps = {2 * eps:.4f}, HA deviation {ha:.4f})",
    )
    for q in (0.01, 0.05, 0.10):
        assert below[q], f"refined endpoint not below HA at S_n/n = {q}"
    assert not below[0.5]


def test_criterion_7_inversion_grid():
    ps = np.linspace(0.0, 1.0, 200)
    epss = np.linspace(0.0, 5.0, 200)
    worst = 0.0
    failures = {"upper interior": 0, "upper at 1": 0, "lower interior": 0, "lower at 0": 0}
    pinsker_failures = 0
    refined_failures = 0
    for p in ps:
        p = float(p)
        for eps in epss:
            eps = float(eps)
            up = kl_inv_upper(p, eps)
            lo = kl_inv_lower(p, eps)
            # an interior root exists unless the branch is already exhausted at its end
            if p < 1.0:
                r = abs(float(bernoulli_kl(p, up)) - eps)
                if r > 1e-10:
                    failures["upper at 1" if up == 1.0 else "upper interior"] += 1
                if math.isfinite(r):
                    worst = max(worst, r)
            if p > 0.0 and float(bernoulli_kl(p, 0.0)) > eps:
                r = abs(float(bernoulli_kl(p, lo)) - eps)
                if r > 1e-10:
                    failures["lower at 0" if lo == 0.0 else "lower interior"] += 1
                if math.isfinite(r):
                    worst = max(worst, r)
            pinsker_failures += up > p + math.sqrt(eps / 2) + 1e-12 or lo < p - math.sqrt(eps / 2) - 1e-12
            refined_failures += up > refined_kl_upper(p, eps) + 1e-12
    residual_failures = sum(failures.values())
    ok = residual_failures == 0 and pinsker_failures == 0 and refined_failures == 0
    record(
        7,
        ok,
        f"round-trip residual > 1e-10 at {residual_failures} points "
        f"({', '.join(f'{k} {v}' for k, v in failures.items())}; worst finite {worst:.3g}); "
        f"Pinsker domination failures {pinsker_failures}, refined domination failures {refined_failures}",
    )
    assert pinsker_failures == 0
    assert refined_failures == 0
    assert residual_failures == 0, failures


def test_criterion_8_mgf_checks():
    ho = hoeffding_suite(1_000_000, seed=0)
    be = bernstein_suite(1_000_000, seed=0)
    sc = scalar_inequality_checks()
    violations = sc["quadratic_exp_bound"]["violations"] + sc["linear_exp_bound"]["violations"]
    ok = all(r.passed for r in ho + be) and violations == 0 and len(ho) == 5 and len(be) == 5
    record(
        8,
        ok,
        f"hoeffding {sum(r.passed for r in ho)}/5, bernstein {sum(r.passed for r in be)}/5, "
        f"scalar violations {violations}",
    )
    assert all(r.passed for r in ho), [r.to_dict() for r in ho if not r.passed]
    assert all(r.passed for r in be), [r.to_dict() for r in be if not r.passed]
    assert violations == 0


def test_criterion_9_determinism(tmp_path):
    argv = ["simulate", "--scenario", "dependent", "--b", "0.3", "--n", "100", "--trials", "500", "--seed", "11"]
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        assert main(argv + ["--output", str(path)]) == 0
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
    record(9, ok, f"two simulate runs, {len(outputs[0])} bytes each, identical: {outputs[0] == outputs[1]}")
    assert ok
