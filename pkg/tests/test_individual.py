import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from martingale_bounds.core import bernoulli_kl, pinsker_radius
from martingale_bounds.individual import (
    E_MINUS_2,
    Branch,
    bernstein_adaptive,
    bernstein_fixed_lambda,
    grid_exponent,
    hoeffding_azuma_radius,
    kl_drift_bound,
    lambda_grid,
    squared_width_sum,
)

deltas = st.floats(min_value=1e-6, max_value=0.99)
ratios = st.floats(min_value=1.01, max_value=5.0)


def unit_ranges(n, width=1.0):
    return np.full(n, -width / 2), np.full(n, width / 2)


class TestKlDrift:
    def test_radius(self):
        res = kl_drift_bound(5, 100, 0.05)
        assert res.radius == pytest.approx(math.log(2020) / 100, rel=1e-15)
        assert res.radius == pytest.approx(0.076109, abs=5e-7)

    def test_endpoints(self):
        res = kl_drift_bound(5, 100, 0.05)
        eps = res.radius
        assert bernoulli_kl(0.05, res.upper) == pytest.approx(eps, abs=1e-12)
        assert bernoulli_kl(0.05, res.lower) == pytest.approx(eps, abs=1e-12)
        assert res.extras["pinsker_upper"] == pytest.approx(0.05 + math.sqrt(eps / 2), rel=1e-15)
        assert res.extras["pinsker_upper"] == pytest.approx(0.2451, abs=5e-5)
        assert res.extras["refined_upper"] == pytest.approx(0.05 + math.sqrt(0.1 * eps) + 2 * eps, rel=1e-15)
        # exact inversion is the tightest of the three upper endpoints here
        assert res.upper < res.extras["pinsker_upper"] < res.extras["refined_upper"]

    @pytest.mark.parametrize("n", [1, 10, 100, 1000])
    def test_contains_center(self, n):
        for k in range(0, n + 1, max(1, n // 20)):
            res = kl_drift_bound(k, n, 0.1)
            assert res.lower <= k / n <= res.upper
            assert 0.0 <= res.lower and res.upper <= 1.0

    @given(st.integers(1, 5000), st.floats(0, 1), deltas)
    def test_pinsker_relaxation(self, n, frac, delta):
        S = frac * n
        res = kl_drift_bound(S, n, delta)
        half = math.sqrt(math.log((n + 1) / delta) / (2 * n))
        assert res.upper - S / n <= half + 1e-12
        assert S / n - res.lower <= half + 1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            kl_drift_bound(101, 100, 0.05)
        with pytest.raises(ValueError):
            kl_drift_bound(-1, 100, 0.05)
        with pytest.raises(ValueError):
            kl_drift_bound(5, 100, 1.0)
        with pytest.raises(ValueError):
            kl_drift_bound(5, 0, 0.05)


class TestHoeffdingAzuma:
    def test_examples(self):
        assert hoeffding_azuma_radius((np.zeros(5), np.zeros(5)), 0.05).radius == 0.0
        r = hoeffding_azuma_radius(unit_ranges(100), 0.05).radius
        assert r == pytest.approx(math.sqrt(0.5 * math.log(40) * 100), rel=1e-15)
        assert r == pytest.approx(13.581, abs=5e-4)

    def test_accepts_row_layout(self):
        rows = np.column_stack(unit_ranges(10))
        assert hoeffding_azuma_radius(rows, 0.1).radius == hoeffding_azuma_radius(unit_ranges(10), 0.1).radius

    @given(st.lists(st.floats(0, 10), min_size=1, max_size=50), deltas)
    def test_homogeneity(self, widths, delta):
        w = np.asarray(widths)
        r1 = hoeffding_azuma_radius((-w / 3, 2 * w / 3), delta).radius
        r2 = hoeffding_azuma_radius((-2 * w / 3, 4 * w / 3), delta).radius
        assert r2 == pytest.approx(2 * r1, rel=1e-12, abs=1e-300)

    def test_errors(self):
        with pytest.raises(ValueError):
            hoeffding_azuma_radius((np.array([]), np.array([])), 0.05)
        with pytest.raises(ValueError):
            hoeffding_azuma_radius((np.array([0.1]), np.array([0.5])), 0.05)
        with pytest.raises(ValueError):
            hoeffding_azuma_radius(unit_ranges(3), 0.0)
        with pytest.raises(ValueError):
            squared_width_sum(np.ones((3, 3)))


class TestLambdaGrid:
    def test_size_examples(self):
        assert lambda_grid(1.0, 1000, 0.05, 1.1).size == 29
        assert lambda_grid(1.0, 100, 0.05, 1.1).size == 17
        m = math.ceil(math.log(math.sqrt(E_MINUS_2 * 1000 / math.log(40))) / math.log(1.1))
        assert m + 1 == 29

    def test_huge_ratio(self):
        grid = lambda_grid(1.0, 1000, 0.05, 1e9)
        assert grid.size == 2
        lam0 = math.sqrt(math.log(40) / (E_MINUS_2 * 1000))
        assert grid.values == pytest.approx((lam0, 1.0), rel=1e-15)

    def test_scaling_in_k(self):
        g1 = lambda_grid(1.0, 500, 0.05)
        g2 = lambda_grid(2.0, 500, 0.05)
        assert g1.size == g2.size
        assert np.allclose(np.array(g2.values), np.array(g1.values) / 2, rtol=1e-15, atol=0)

    def test_degenerate_range(self):
        grid = lambda_grid(3.0, 2, 0.05)
        assert grid.values == (1 / 3,) and grid.size == 1

    @given(st.floats(0.01, 100), st.integers(1, 100_000), deltas, ratios)
    def test_structure(self, K, n, delta, c):
        grid = lambda_grid(K, n, delta, c)
        values = np.array(grid.values)
        assert values[-1] == 1.0 / K
        assert np.all(np.diff(values) > 0)
        assert np.all(values[1:] / values[:-1] <= c + 1e-12)
        if grid.size > 1:
            lam0 = (1 / K) * math.sqrt(math.log(2 / delta) / (E_MINUS_2 * n))
            assert values[0] == pytest.approx(lam0, rel=1e-14)
            assert grid.size == grid_exponent(n, delta, c) + 1

    def test_coverage_of_random_lambda(self):
        rng = np.random.default_rng(11)
        for K, n, delta, c in [(1.0, 1000, 0.05, 1.1), (11.0, 100, 0.05, 1.1), (0.5, 10_000, 0.01, 1.5)]:
            grid = np.array(lambda_grid(K, n, delta, c).values)
            stars = rng.uniform(grid[0], 1 / K, 10_000)
            idx = np.searchsorted(grid, stars, side="left")
            chosen = grid[idx]
            assert np.all(chosen >= stars)
            assert np.all(chosen <= c * stars * (1 + 1e-12))

    def test_errors(self):
        with pytest.raises(ValueError):
            lambda_grid(1.0, 100, 0.05, 1.0)
        with pytest.raises(ValueError):
            lambda_grid(0.0, 100, 0.05)
        with pytest.raises(ValueError):
            lambda_grid(1.0, 0, 0.05)


class TestBernstein:
    def test_fixed_examples(self):
        assert bernstein_fixed_lambda(0.0, 0.5, 0.05).radius == pytest.approx(math.log(40) / 0.5, rel=1e-15)
        r = bernstein_fixed_lambda(10.0, 0.5, 0.05).radius
        assert r == pytest.approx(math.log(40) / 0.5 + 0.5 * E_MINUS_2 * 10, rel=1e-15)
        assert r == pytest.approx(10.969, abs=5e-4)
        V = 50.0
        lam = math.sqrt(math.log(40) / (E_MINUS_2 * V))
        assert bernstein_fixed_lambda(V, lam, 0.05).radius == pytest.approx(
            2 * math.sqrt(E_MINUS_2 * V * math.log(40)), rel=1e-14
        )

    def test_fixed_errors(self):
        with pytest.raises(ValueError):
            bernstein_fixed_lambda(1.0, 0.6, 0.05, K=2.0)
        with pytest.raises(ValueError):
            bernstein_fixed_lambda(1.0, 0.0, 0.05)
        with pytest.raises(ValueError):
            bernstein_fixed_lambda(-1.0, 0.5, 0.05)

    def test_adaptive_example(self):
        res = bernstein_adaptive(10.0, 1.0, 100, 0.05, 1.1)
        assert res.grid_size == 17
        condition = math.sqrt(math.log(680) / (E_MINUS_2 * 10))
        assert condition == pytest.approx(0.953, abs=5e-4)
        assert res.branch is Branch.GRID_OK
        assert res.radius == pytest.approx(2.1 * math.sqrt(E_MINUS_2 * 10 * math.log(680)), rel=1e-14)
        assert res.radius == pytest.approx(14.37, abs=5e-3)
        grid = lambda_grid(1.0, 100, 0.05, 1.1).values
        assert res.lambda_used == max(v for v in grid if v <= condition)

    def test_zero_variance_falls_back(self):
        res = bernstein_adaptive(0.0, 1.0, 100, 0.05)
        assert res.branch is Branch.VARIANCE_SMALL
        assert res.radius == pytest.approx(2 * math.log(680), rel=1e-15)
        assert res.lambda_used == 1.0

    def test_monotone_in_variance_within_grid_ok(self):
        radii = [bernstein_adaptive(v, 1.0, 1000, 0.05) for v in np.linspace(10, 1000, 200)]
        ok = [r.radius for r in radii if r.branch is Branch.GRID_OK]
        assert len(ok) == 200
        assert all(b >= a for a, b in zip(ok, ok[1:]))

    @given(st.floats(0, 5e4), st.floats(0.05, 20), st.integers(1, 5000), deltas, ratios)
    @settings(max_examples=300)
    def test_adaptive_vs_fixed_grid(self, V, K, n, delta, c):
        res = bernstein_adaptive(V, K, n, delta, c)
        grid = lambda_grid(K, n, delta, c)
        V_eff = min(V, K * K * n)
        best_fixed = min(bernstein_fixed_lambda(V_eff, lam, delta / grid.size, K).radius for lam in grid.values)
        assert res.radius >= best_fixed * (1 - 1e-12)
        if res.branch is Branch.GRID_OK:
            optimum = 2 * math.sqrt(E_MINUS_2 * V_eff * math.log(2 * grid.size / delta))
            assert res.radius <= (1 + c) / 2 * optimum * (1 + 1e-12)

    @pytest.mark.parametrize("n", [100, 1000, 10_000])
    @pytest.mark.parametrize("ratio", [0.01, 0.05])
    def test_small_variance_beats_hoeffding_azuma(self, n, ratio):
        ha = hoeffding_azuma_radius(unit_ranges(n), 0.05).radius
        res = bernstein_adaptive(ratio * n, 1.0, n, 0.05)
        assert res.radius < ha

    @pytest.mark.parametrize("n", [1000, 10_000])
    def test_variance_crossover_with_hoeffding_azuma(self, n):
        # in the grid_ok branch Bernstein wins iff V/n < ln(40) / (2 (1+c)^2 (e-2) ln(2 nu/delta))
        nu = lambda_grid(1.0, n, 0.05).size
        threshold = math.log(40) / (2 * 2.1**2 * E_MINUS_2 * math.log(2 * nu / 0.05))
        assert 0.05 < threshold < 0.1
        ha = hoeffding_azuma_radius(unit_ranges(n), 0.05).radius
        below = bernstein_adaptive(0.99 * threshold * n, 1.0, n, 0.05)
        above = bernstein_adaptive(1.01 * threshold * n, 1.0, n, 0.05)
        assert below.branch is Branch.GRID_OK and above.branch is Branch.GRID_OK
        assert below.radius < ha < above.radius

    def test_moderate_variance_loses_to_hoeffding_azuma(self):
        res = bernstein_adaptive(10.0, 1.0, 100, 0.05)
        assert res.branch is Branch.GRID_OK
        assert res.radius > hoeffding_azuma_radius(unit_ranges(100), 0.05).radius

    def test_small_variance_grid_ok_cases_exist(self):
        assert bernstein_adaptive(0.1 * 1000, 1.0, 1000, 0.05).branch is Branch.GRID_OK
        assert bernstein_adaptive(0.01 * 10_000, 1.0, 10_000, 0.05).branch is Branch.GRID_OK

    def test_to_dict(self):
        d = bernstein_adaptive(10.0, 1.0, 100, 0.05).to_dict()
        assert d["branch"] == "grid_ok" and d["grid_size"] == 17 and d["c"] == 1.1


def test_pinsker_radius_matches_kl_drift_half_width():
    res = kl_drift_bound(50, 100, 0.05)
    assert res.extras["pinsker_upper"] - 0.5 == pytest.approx(pinsker_radius(res.radius), rel=1e-14)
