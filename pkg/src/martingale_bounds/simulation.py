"""Seeded martingale generators and Monte-Carlo coverage experiments.

Every generator draws its randomness from a fixed number of uniforms per
round, so a whole batch of independent runs can be evolved in lockstep with
numpy while each run still owns its own random stream. All conditional laws
are two-point (or, for importance-weighted sampling, a known sampling
distribution), which makes the martingale property checkable exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_delta, check_positive_int, check_prob, as_distribution
from .core import refined_kl_upper
from .individual import (
    DEFAULT_C,
    bernstein_adaptive,
    bernstein_fixed_lambda,
    hoeffding_azuma_radius,
    kl_drift_bound,
)
from .pac_bayes import (
    HypothesisSummary,
    gibbs_posterior,
    pb_bernstein_adaptive,
    pb_bernstein_fixed_lambda,
    pb_ha_adaptive,
    pb_ha_fixed_lambda,
    pb_kl_bound,
)

GENERATOR_ID = "numpy-PCG64/SeedSequence(entropy=seed, spawn_key=(trial,))"

KINDS = ("iid_bernoulli", "dependent_bounded", "mds_bounded", "iw_sampling")
MDS_SHAPES = ("two_point", "adaptive")


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulated process.

    iid_bernoulli(b) and dependent_bounded(b, strength) produce X_i in [0, 1]
    with E[X_i | past] = b. mds_bounded(alpha, beta, shape) produces a
    martingale difference sequence with Z_i in [alpha, beta]. iw_sampling
    produces one importance-weighted martingale per hypothesis.
    """

    kind: str
    n: int
    seed: int = 0
    b: float = 0.5
    strength: float = 0.5
    alpha: float = -0.5
    beta: float = 0.5
    shape: str = "two_point"
    shrink: float = 0.5
    rewards: tuple[float, ...] = ()
    p_min: float = 0.1
    adaptive: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        check_positive_int(self.n)
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        check_prob(self.b, "b")
        check_prob(self.strength, "strength")
        if self.kind == "mds_bounded":
            if not self.alpha <= 0.0 <= self.beta:
                raise ValueError("mds ranges need alpha <= 0 <= beta")
            if self.shape not in MDS_SHAPES:
                raise ValueError(f"unknown mds shape {self.shape!r}; expected one of {MDS_SHAPES}")
            check_prob(self.shrink, "shrink")
        if self.kind == "iw_sampling":
            r = np.asarray(self.rewards, dtype=float)
            if r.ndim != 1 or r.size == 0 or np.any((r < 0) | (r > 1)):
                raise ValueError("rewards must be a non-empty vector in [0, 1]")
            if not 0.0 < self.p_min <= 1.0 / r.size + 1e-15:
                raise ValueError("p_min must lie in (0, 1/|H|]")
            object.__setattr__(self, "rewards", tuple(float(x) for x in r))

    @classmethod
    def iid_bernoulli(cls, b: float, n: int, seed: int = 0) -> "ScenarioSpec":
        return cls("iid_bernoulli", n, seed, b=b)

    @classmethod
    def dependent_bounded(cls, b: float, strength: float, n: int, seed: int = 0) -> "ScenarioSpec":
        return cls("dependent_bounded", n, seed, b=b, strength=strength)

    @classmethod
    def mds_bounded(
        cls, alpha: float, beta: float, n: int, shape: str = "two_point", seed: int = 0, shrink: float = 0.5
    ) -> "ScenarioSpec":
        return cls("mds_bounded", n, seed, alpha=alpha, beta=beta, shape=shape, shrink=shrink)

    @classmethod
    def iw_sampling(
        cls, rewards, p_min: float, n: int, adaptive: bool = False, seed: int = 0
    ) -> "ScenarioSpec":
        return cls("iw_sampling", n, seed, rewards=tuple(rewards), p_min=p_min, adaptive=adaptive)

    @property
    def num_hypotheses(self) -> int:
        return len(self.rewards) if self.kind == "iw_sampling" else 1

    @property
    def K(self) -> float:
        """Almost-sure bound on |Z_i|."""
        if self.kind == "iw_sampling":
            return 1.0 / self.p_min + 1.0
        if self.kind == "mds_bounded":
            return max(-self.alpha, self.beta)
        return max(self.b, 1.0 - self.b)

    @property
    def ranges(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-round ``(alpha, beta)`` containing every increment."""
        if self.kind == "iw_sampling":
            lo, hi = -1.0, 1.0 / self.p_min
        elif self.kind == "mds_bounded":
            lo, hi = self.alpha, self.beta
        else:
            lo, hi = -self.b, 1.0 - self.b
        return np.full(self.n, lo), np.full(self.n, hi)

    @property
    def uniforms_per_round(self) -> int:
        return 2 if self.kind == "iw_sampling" else 1

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "seed": int(self.seed)}
        if self.kind in ("iid_bernoulli", "dependent_bounded"):
            out["b"] = self.b
        if self.kind == "dependent_bounded":
            out["strength"] = self.strength
        if self.kind == "mds_bounded":
            out.update(alpha=self.alpha, beta=self.beta, shape=self.shape, shrink=self.shrink)
        if self.kind == "iw_sampling":
            out.update(rewards=list(self.rewards), p_min=self.p_min, adaptive=self.adaptive)
        return out


@dataclass
class MartingaleTrace:
    """Realised path(s). Leading axis is the batch; per-hypothesis arrays add a trailing H axis.

    ``Z``/``M``/``V`` are increments, running sums and running conditional
    variances. Sequence kinds also expose ``X`` and the two-point conditional
    law of each round (``support`` rows ``[lo, hi]``, ``p_high``). The
    importance-weighted kind exposes the sampling distributions ``P``, the
    chosen ``actions``, observed ``reward``, and the [0, 1]-valued
    ``X`` = p_min * reward * 1[A = h] / P(h) whose conditional mean is ``b``.
    """

    spec: ScenarioSpec
    Z: np.ndarray
    M: np.ndarray
    V: np.ndarray
    X: np.ndarray | None = None
    b: np.ndarray | float | None = None
    support: np.ndarray | None = None
    p_high: np.ndarray | None = None
    P: np.ndarray | None = None
    actions: np.ndarray | None = None
    reward: np.ndarray | None = None

    def conditional_means(self) -> np.ndarray:
        """Exact E[Z_i | past] for every round, from the recorded conditional laws."""
        if self.spec.kind == "iw_sampling":
            r = np.asarray(self.spec.rewards)
            # only action h contributes: P(h) * r(h) / P(h) - r(h)
            return self.P * (r / self.P) - r
        lo, hi = self.support[..., 0], self.support[..., 1]
        mean_x = lo + self.p_high * (hi - lo)
        if self.spec.kind == "mds_bounded":
            return mean_x
        return mean_x - self.spec.b


def substream(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),))))


def _two_point(U: np.ndarray, lo: np.ndarray, hi: np.ndarray, p_high: np.ndarray) -> np.ndarray:
    return np.where(U < p_high, hi, lo)


def _evolve_sequence(spec: ScenarioSpec, U: np.ndarray) -> MartingaleTrace:
    B, n = U.shape[0], spec.n
    lo = np.empty((B, n))
    hi = np.empty((B, n))
    p_high = np.empty((B, n))
    values = np.empty((B, n))
    if spec.kind == "iid_bernoulli":
        lo[:] = 0.0
        hi[:] = 1.0
        p_high[:] = spec.b
        values = _two_point(U[:, :, 0], lo, hi, p_high)
    elif spec.kind == "dependent_bounded":
        b, s = spec.b, spec.strength
        prev = np.full(B, b)
        for i in range(n):
            lo_i = b * s * prev
            hi_i = b + (1.0 - b) * (1.0 - s * (1.0 - prev))
            gap = hi_i - lo_i
            with np.errstate(invalid="ignore", divide="ignore"):
                ph = np.where(gap > 0, (b - lo_i) / gap, 0.0)
            lo[:, i], hi[:, i], p_high[:, i] = lo_i, hi_i, ph
            prev = _two_point(U[:, i, 0], lo_i, hi_i, ph)
            values[:, i] = prev
    else:
        alpha, beta = spec.alpha, spec.beta
        width = beta - alpha
        ph = -alpha / width if width > 0 else 0.0
        if spec.shape == "two_point":
            lo[:] = alpha
            hi[:] = beta
            p_high[:] = ph
            values = _two_point(U[:, :, 0], lo, hi, p_high)
        else:
            running = np.zeros(B)
            for i in range(n):
                scale = np.where(running >= 0.0, 1.0, spec.shrink)
                lo[:, i], hi[:, i], p_high[:, i] = alpha * scale, beta * scale, ph
                z = _two_point(U[:, i, 0], lo[:, i], hi[:, i], ph)
                values[:, i] = z
                running = running + z
    cond_var = (hi - lo) ** 2 * p_high * (1.0 - p_high)
    if spec.kind == "mds_bounded":
        Z, X, b = values, None, None
    else:
        Z, X, b = values - spec.b, values, spec.b
    return MartingaleTrace(
        spec=spec,
        Z=Z,
        M=np.cumsum(Z, axis=1),
        V=np.cumsum(cond_var, axis=1),
        X=X,
        b=b,
        support=np.stack([lo, hi], axis=-1),
        p_high=p_high,
    )


def _evolve_field(spec: ScenarioSpec, U: np.ndarray) -> MartingaleTrace:
    B, n, H = U.shape[0], spec.n, spec.num_hypotheses
    r = np.asarray(spec.rewards)
    p_min = spec.p_min
    P = np.empty((B, n, H))
    Z = np.empty((B, n, H))
    X = np.empty((B, n, H))
    cond_var = np.empty((B, n, H))
    actions = np.empty((B, n), dtype=np.int64)
    reward = np.empty((B, n))
    estimate = np.zeros((B, H))
    rows = np.arange(B)
    for i in range(n):
        if spec.adaptive and i > 0:
            w = np.maximum(estimate / i, 0.0)
            total = w.sum(axis=1, keepdims=True)
            with np.errstate(invalid="ignore", divide="ignore"):
                greedy = np.where(total > 0, w / total, 1.0 / H)
            p = p_min + (1.0 - H * p_min) * greedy
        else:
            p = np.full((B, H), 1.0 / H)
        p = p / p.sum(axis=1, keepdims=True)
        a = (np.cumsum(p, axis=1) < U[:, i, 0][:, None]).sum(axis=1)
        a = np.minimum(a, H - 1)
        rew = (U[:, i, 1] < r[a]).astype(float)
        hit = np.zeros((B, H))
        hit[rows, a] = rew / p[rows, a]
        P[:, i], actions[:, i], reward[:, i] = p, a, rew
        Z[:, i] = hit - r
        X[:, i] = p_min * hit
        cond_var[:, i] = r / p - r**2
        estimate += hit
    return MartingaleTrace(
        spec=spec,
        Z=Z,
        M=np.cumsum(Z, axis=1),
        V=np.cumsum(cond_var, axis=1),
        X=X,
        b=p_min * r,
        P=P,
        actions=actions,
        reward=reward,
    )


def evolve(spec: ScenarioSpec, U: np.ndarray) -> MartingaleTrace:
    """Run a batch of paths driven by uniforms ``U`` of shape (batch, n, uniforms_per_round)."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 3 or U.shape[1:] != (spec.n, spec.uniforms_per_round):
        raise ValueError("U must have shape (batch, n, uniforms_per_round)")
    if spec.kind == "iw_sampling":
        return _evolve_field(spec, U)
    return _evolve_sequence(spec, U)


def simulate_batch(spec: ScenarioSpec, size: int, rng: np.random.Generator) -> MartingaleTrace:
    return evolve(spec, rng.random((size, spec.n, spec.uniforms_per_round)))


def _squeeze(trace: MartingaleTrace) -> MartingaleTrace:
    for name in ("Z", "M", "V", "X", "support", "p_high", "P", "actions", "reward"):
        value = getattr(trace, name)
        if value is not None:
            setattr(trace, name, value[0])
    return trace


def simulate_sequence(spec: ScenarioSpec) -> MartingaleTrace:
    """One path of a sequence scenario, seeded by ``spec.seed``."""
    if spec.kind == "iw_sampling":
        raise ValueError("use simulate_field for iw_sampling scenarios")
    return _squeeze(simulate_batch(spec, 1, substream(spec.seed, 0)))


def simulate_field(spec: ScenarioSpec) -> MartingaleTrace:
    """One run of the importance-weighted field (arrays of shape (n, H))."""
    if spec.kind != "iw_sampling":
        raise ValueError("simulate_field needs an iw_sampling scenario")
    return _squeeze(simulate_batch(spec, 1, substream(spec.seed, 0)))


# --- coverage experiments -------------------------------------------------

INDIVIDUAL_BOUNDS = ("kl-drift", "hoeffding-azuma", "bernstein", "bernstein-fixed")
PAC_BAYES_BOUNDS = ("pb-kl", "pb-ha-fixed", "pb-ha", "pb-bernstein-fixed", "pb-bernstein")
BOUND_IDS = INDIVIDUAL_BOUNDS + PAC_BAYES_BOUNDS


def coverage_band(delta: float, trials: int) -> float:
    """delta + 3 binomial standard deviations."""
    return delta + 3.0 * math.sqrt(delta * (1.0 - delta) / trials)


@dataclass
class BoundCoverage:
    bound_id: str
    trials: int
    violations: int
    band: float
    mean_radius: float
    mean_width: float | None = None
    branch_counts: dict = field(default_factory=dict)
    grid_size: int | None = None

    @property
    def violation_rate(self) -> float:
        return self.violations / self.trials

    @property
    def passed(self) -> bool:
        return self.violation_rate <= self.band

    def to_dict(self) -> dict:
        out = asdict(self)
        out["violation_rate"] = self.violation_rate
        out["passed"] = self.passed
        return out


@dataclass
class ExperimentReport:
    scenario: dict
    generator: str
    master_seed: int
    trials: int
    delta: float
    c: float
    bounds: list[BoundCoverage]
    crossover: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bounds)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "generator": self.generator,
            "master_seed": self.master_seed,
            "trials": self.trials,
            "delta": self.delta,
            "c": self.c,
            "band": coverage_band(self.delta, self.trials),
            "passed": self.passed,
            "bounds": [b.to_dict() for b in self.bounds],
            "crossover": self.crossover,
        }


def _default_bounds(spec: ScenarioSpec) -> tuple[str, ...]:
    if spec.kind == "iw_sampling":
        return ("pb-kl", "pb-ha", "pb-bernstein")
    if spec.kind == "mds_bounded":
        return ("hoeffding-azuma", "bernstein")
    return ("kl-drift", "hoeffding-azuma", "bernstein")


def _check_bound_ids(spec: ScenarioSpec, bound_ids) -> tuple[str, ...]:
    if bound_ids is None:
        return _default_bounds(spec)
    if isinstance(bound_ids, str):
        bound_ids = (bound_ids,)
    bound_ids = tuple(bound_ids)
    for bound_id in bound_ids:
        if bound_id not in BOUND_IDS:
            raise ValueError(f"unknown bound {bound_id!r}; expected one of {BOUND_IDS}")
        if bound_id in PAC_BAYES_BOUNDS and spec.kind != "iw_sampling":
            raise ValueError(f"{bound_id} needs an iw_sampling scenario")
        if bound_id in INDIVIDUAL_BOUNDS and spec.kind == "iw_sampling" and spec.num_hypotheses != 1:
            raise ValueError(f"{bound_id} needs a single martingale (|H| = 1 or a sequence scenario)")
        if bound_id == "kl-drift" and spec.kind not in ("iid_bernoulli", "dependent_bounded", "iw_sampling"):
            raise ValueError("kl-drift needs a [0, 1]-valued sequence scenario")
    return bound_ids


def _variance_bound(trace: MartingaleTrace, variance_bound: str) -> np.ndarray:
    if variance_bound == "exact":
        return trace.V[:, -1]
    if variance_bound == "sample":
        if trace.P is None:
            raise ValueError("the sample-dependent variance bound needs an iw_sampling scenario")
        # E[Z(h)^2 | past] <= 1 / P_i(h)
        return np.sum(1.0 / trace.P, axis=1)
    raise ValueError("variance_bound must be 'exact' or 'sample'")


def _branch_count(counts: dict, branch) -> None:
    if branch is not None:
        counts[branch.value] = counts.get(branch.value, 0) + 1


def _individual_coverage(spec, trace, bound_id, delta, c, variance_bound, trials, band) -> BoundCoverage:
    n = spec.n
    K = spec.K
    counts: dict = {}
    if trace.P is not None:
        # |H| = 1 field: treat its single martingale as a sequence
        M = trace.M[:, -1, 0]
        V = _variance_bound(trace, variance_bound)[:, 0]
        S = trace.X.sum(axis=1)[:, 0]
        b = float(trace.b[0])
    else:
        M = trace.M[:, -1]
        V = _variance_bound(trace, variance_bound)
        S = trace.X.sum(axis=1) if trace.X is not None else None
        b = trace.b
    if bound_id == "kl-drift":
        cache: dict = {}
        violations, widths = 0, []
        for s in np.clip(S, 0.0, n):
            key = float(s)
            if key not in cache:
                cache[key] = kl_drift_bound(key, n, delta)
            res = cache[key]
            violations += not (res.lower <= b <= res.upper)
            widths.append(res.upper - res.lower)
        return BoundCoverage(bound_id, trials, violations, band, res.radius, float(np.mean(widths)))
    if bound_id == "hoeffding-azuma":
        radius = hoeffding_azuma_radius(spec.ranges, delta).radius
        violations = int(np.sum(np.abs(M) > radius))
        return BoundCoverage(bound_id, trials, violations, band, radius, 2.0 * radius)
    if bound_id == "bernstein-fixed":
        lam = 1.0 / K
        radii = np.array([bernstein_fixed_lambda(v, lam, delta, K).radius for v in V])
    else:
        results = [bernstein_adaptive(v, K, n, delta, c) for v in V]
        radii = np.array([r.radius for r in results])
        for r in results:
            _branch_count(counts, r.branch)
    violations = int(np.sum(np.abs(M) > radii))
    grid_size = results[0].grid_size if bound_id == "bernstein" else None
    return BoundCoverage(
        bound_id, trials, violations, band, float(np.mean(radii)), float(np.mean(2 * radii)), counts, grid_size
    )


def _pac_bayes_coverage(
    spec, trace, bound_id, delta, c, variance_bound, trials, band, family, prior, gibbs_gamma
) -> BoundCoverage:
    n, K = spec.n, spec.K
    b = trace.b
    V_all = _variance_bound(trace, variance_bound)
    violations = 0
    radii = []
    widths = []
    counts: dict = {}
    grid_size = None
    ranges = spec.ranges
    w2 = math.fsum((ranges[1] - ranges[0]) ** 2)
    lam_ha = math.sqrt(8.0 * math.log(2.0 / delta) / w2)
    for t in range(trials):
        summary = HypothesisSummary(
            n=n, S=trace.X[t].sum(axis=0), M=trace.M[t, -1], V=trace.V[t, -1], ranges=ranges, K=K
        )
        rhos = list(family)
        if gibbs_gamma is not None:
            # importance-weighted reward estimates, X / p_min = observed hit
            estimates = summary.S / (n * spec.p_min)
            rhos.append(gibbs_posterior(-estimates, prior, gibbs_gamma))
        failed = False
        for rho in rhos:
            if bound_id == "pb-kl":
                res = pb_kl_bound(summary, rho, prior, delta)
                target = math.fsum(rho * b)
                failed |= not (res.lower <= target <= res.upper)
                widths.append(res.upper - res.lower)
            else:
                value = abs(math.fsum(rho * summary.M))
                if bound_id == "pb-ha-fixed":
                    res = pb_ha_fixed_lambda(summary, rho, prior, lam_ha, delta)
                elif bound_id == "pb-ha":
                    res = pb_ha_adaptive(summary, rho, prior, delta, c)
                elif bound_id == "pb-bernstein-fixed":
                    res = pb_bernstein_fixed_lambda(summary, rho, prior, 1.0 / K, delta)
                else:
                    res = pb_bernstein_adaptive(
                        summary, rho, prior, delta, c, V_upper=math.fsum(rho * V_all[t])
                    )
                    grid_size = res.grid_size
                    _branch_count(counts, res.branch)
                failed |= value > res.radius
                widths.append(2.0 * res.radius)
            radii.append(res.radius)
        violations += failed
    return BoundCoverage(
        bound_id,
        trials,
        violations,
        band,
        float(np.mean(radii)),
        float(np.mean(widths)),
        counts,
        grid_size,
    )


def coverage_experiment(
    spec: ScenarioSpec,
    bound_id=None,
    rho_family=None,
    delta: float = 0.05,
    trials: int = 1000,
    master_seed: int = 0,
    c: float = DEFAULT_C,
    gibbs_gamma: float | None = 5.0,
    variance_bound: str = "exact",
) -> ExperimentReport:
    """Count how often each bound fails over ``trials`` independent runs.

    Trial t draws its uniforms from ``substream(master_seed, t)``, so results
    do not depend on batching. For weighted-average bounds a trial fails if
    the bound fails for ANY member of ``rho_family`` (default: uniform plus
    every point mass) or for the Gibbs posterior built from the realised
    importance-weighted reward estimates (skipped if ``gibbs_gamma`` is None).
    The reference distribution is uniform.
    """
    delta = check_delta(delta)
    trials = check_positive_int(trials, "trials")
    bound_ids = _check_bound_ids(spec, bound_id)
    k = spec.uniforms_per_round
    U = np.stack([substream(master_seed, t).random((spec.n, k)) for t in range(trials)])
    trace = evolve(spec, U)
    band = coverage_band(delta, trials)
    H = spec.num_hypotheses
    prior = np.full(H, 1.0 / H)
    if rho_family is None:
        family = [prior] + [np.eye(H)[h] for h in range(H)]
    else:
        family = [as_distribution(rho, "rho") for rho in rho_family]
    results = []
    for bid in bound_ids:
        if bid in PAC_BAYES_BOUNDS:
            results.append(
                _pac_bayes_coverage(
                    spec, trace, bid, delta, c, variance_bound, trials, band, family, prior, gibbs_gamma
                )
            )
        else:
            results.append(_individual_coverage(spec, trace, bid, delta, c, variance_bound, trials, band))
    crossover = {}
    if spec.kind in ("iid_bernoulli", "dependent_bounded"):
        n = spec.n
        means = trace.X.sum(axis=1) / n
        eps = math.log((n + 1) / delta) / n
        ha = hoeffding_azuma_radius(spec.ranges, delta).radius / n
        refined = np.array([refined_kl_upper(min(max(m, 0.0), 1.0), eps) for m in means]) - means
        crossover = {
            "refined_beats_hoeffding_azuma": float(np.mean(refined < ha)),
            "mean_empirical": float(np.mean(means)),
        }
    return ExperimentReport(
        scenario=spec.to_dict(),
        generator=GENERATOR_ID,
        master_seed=int(master_seed),
        trials=trials,
        delta=delta,
        c=c,
        bounds=results,
        crossover=crossover,
    )


# --- tightness comparison --------------------------------------------------

TIGHTNESS_COLUMNS = (
    "label",
    "n",
    "S_n",
    "V_n",
    "empirical_mean",
    "kl_width",
    "pinsker_width",
    "refined_width",
    "ha_width",
    "bernstein_width",
    "bernstein_branch",
    "winner",
    "refined_beats_ha",
    "kl_beats_ha",
)


def tightness_table(scenarios, delta: float = 0.05, c: float = DEFAULT_C) -> list[dict]:
    """Compare upper confidence endpoints for the drift of a [0, 1]-valued walk.

    Each scenario is a mapping with ``S_n``, ``n``, optional ``V_n`` (default
    n q (1 - q) at the empirical mean q) and optional ``label``. Every width
    is the distance from S_n/n up to the bound's (unclamped) upper endpoint,
    so the one-sided refined bound compares directly with the others.
    Hoeffding-Azuma uses unit ranges; Bernstein uses K = 1.
    """
    delta = check_delta(delta)
    rows = []
    for scenario in scenarios:
        n = check_positive_int(scenario["n"])
        S_n = float(scenario["S_n"])
        q = S_n / n
        V_n = float(scenario.get("V_n", n * q * (1.0 - q)))
        kl_res = kl_drift_bound(S_n, n, delta)
        eps = kl_res.radius
        ha = hoeffding_azuma_radius((np.full(n, -0.5), np.full(n, 0.5)), delta).radius / n
        bern = bernstein_adaptive(V_n, 1.0, n, delta, c)
        widths = {
            "kl": kl_res.upper - q,
            "pinsker": math.sqrt(eps / 2.0),
            "refined": refined_kl_upper(q, eps) - q,
            "ha": ha,
            "bernstein": bern.radius / n,
        }
        rows.append(
            {
                "label": scenario.get("label", f"S_n/n={q:.6g}"),
                "n": n,
                "S_n": S_n,
                "V_n": V_n,
                "empirical_mean": q,
                "kl_width": widths["kl"],
                "pinsker_width": widths["pinsker"],
                "refined_width": widths["refined"],
                "ha_width": widths["ha"],
                "bernstein_width": widths["bernstein"],
                "bernstein_branch": bern.branch.value,
                "winner": min(widths, key=widths.get),
                "refined_beats_ha": widths["refined"] < widths["ha"],
                "kl_beats_ha": widths["kl"] < widths["ha"],
            }
        )
    return rows


def fmt_number(x) -> str:
    """17 significant digits: round-trip safe for float64."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def rows_to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_number(row.get(col, "")) if row.get(col) is not None else "" for col in columns])
    return buf.getvalue()


def to_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


REPORT_COLUMNS = (
    "bound_id",
    "trials",
    "violations",
    "violation_rate",
    "band",
    "passed",
    "mean_radius",
    "mean_width",
    "grid_size",
    "grid_ok",
    "variance_small",
)


def report_rows(report: ExperimentReport) -> list[dict]:
    rows = []
    for b in report.bounds:
        row = b.to_dict()
        row["grid_ok"] = b.branch_counts.get("grid_ok", 0)
        row["variance_small"] = b.branch_counts.get("variance_small", 0)
        rows.append(row)
    return rows
