"""Brute-force verifiers: exact binomial sums, {0,1}^n enumeration and MGF checks.

These are deliberately slow and literal. They do not share code paths with
the bound formulas beyond the simulators that generate test processes.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from ._validation import check_delta, check_positive_int, check_prob
from .core import bernoulli_kl
from .individual import E_MINUS_2, as_ranges
from .simulation import ScenarioSpec, evolve, substream

MAX_MGF_N = 2000
MAX_ENUM_N = 20
MAX_COMPARISON_N = 12
CHUNK = 100_000
SE_MARGIN = 4.0
SCALAR_ATOL = 1e-12


def exact_mgf_kl(n: int, b: float) -> float:
    """E[exp(n kl(S_n/n || b))] for S_n ~ Binomial(n, b), by exact summation.

    Each of the n+1 terms C(n,k) b^k (1-b)^(n-k) e^{n kl(k/n||b)} is formed in
    log space and the terms are added with pairwise summation after
    factoring out the largest. At b in {0, 1} the value is 1.
    """
    n = check_positive_int(n)
    if n > MAX_MGF_N:
        raise ValueError(f"n must be at most {MAX_MGF_N}, got {n}")
    b = check_prob(b, "b")
    return float(exact_mgf_kl_grid(n, np.array([b]))[0])


def exact_mgf_kl_grid(n: int, b) -> np.ndarray:
    """exact_mgf_kl for one n and a vector of biases."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    k = np.arange(n + 1, dtype=float)
    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    out = np.ones(b.shape)
    inner = (b > 0) & (b < 1)
    if not np.any(inner):
        return out
    bb = b[inner][:, None]
    log_prob = log_binom + xlogy(k, bb) + xlogy(n - k, 1.0 - bb)
    n_kl = n * bernoulli_kl(k / n, bb)
    terms = log_prob + n_kl
    top = terms.max(axis=1, keepdims=True)
    # np.sum reduces contiguous rows pairwise
    out[inner] = np.exp(top[:, 0]) * np.sum(np.exp(terms - top), axis=1)
    return out


# --- convex test functions ------------------------------------------------

CONVEX_KINDS = ("exp-n-kl", "max-coordinate", "squared-deviation", "quadratic", "linear")


@dataclass(frozen=True)
class ConvexTestFunction:
    """A convex function on [0, 1]^n, evaluated row-wise on an (m, n) array."""

    kind: str
    n: int
    b: float = 0.5
    center: float = 0.0
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    weights: np.ndarray | None = field(default=None, repr=False, compare=False)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in CONVEX_KINDS:
            raise ValueError(f"unknown convex family {self.kind!r}; expected one of {CONVEX_KINDS}")
        check_positive_int(self.n)
        if self.kind == "exp-n-kl":
            check_prob(self.b, "b")
        if self.kind == "quadratic":
            A = np.asarray(self.matrix, dtype=float)
            if A.shape != (self.n, self.n) or not np.allclose(A, A.T, rtol=0, atol=1e-12):
                raise ValueError("quadratic needs a symmetric n x n matrix")
            if np.linalg.eigvalsh(A).min() < -1e-10 * max(1.0, np.abs(A).max()):
                raise ValueError("quadratic matrix is not positive semidefinite, so f is not convex")
            object.__setattr__(self, "matrix", A)
        if self.kind == "linear":
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.n,):
                raise ValueError("linear needs n weights")
            object.__setattr__(self, "weights", w)

    @classmethod
    def exp_n_kl(cls, n: int, b: float) -> "ConvexTestFunction":
        return cls("exp-n-kl", n, b=b)

    @classmethod
    def max_coordinate(cls, n: int) -> "ConvexTestFunction":
        return cls("max-coordinate", n)

    @classmethod
    def squared_deviation(cls, n: int, center: float) -> "ConvexTestFunction":
        return cls("squared-deviation", n, center=center)

    @classmethod
    def random_quadratic(cls, n: int, seed: int = 0) -> "ConvexTestFunction":
        G = substream(seed, 0).standard_normal((n, n))
        return cls("quadratic", n, matrix=G.T @ G, seed=seed)

    @classmethod
    def linear(cls, weights) -> "ConvexTestFunction":
        w = np.asarray(weights, dtype=float)
        return cls("linear", w.size, weights=w)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {x.shape[1]}")
        if self.kind == "exp-n-kl":
            mean = np.clip(x.mean(axis=1), 0.0, 1.0)
            return np.exp(self.n * bernoulli_kl(mean, self.b))
        if self.kind == "max-coordinate":
            return x.max(axis=1)
        if self.kind == "squared-deviation":
            return (x.sum(axis=1) - self.center) ** 2
        if self.kind == "quadratic":
            return np.einsum("ij,jk,ik->i", x, self.matrix, x)
        return x @ self.weights

    def describe(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.kind == "exp-n-kl":
            out["b"] = self.b
        if self.kind == "squared-deviation":
            out["center"] = self.center
        if self.kind == "quadratic":
            out["seed"] = self.seed
        return out


def convex_catalog(n: int, b: float, seed: int = 0) -> list[ConvexTestFunction]:
    """One member of every family, tuned to biases b."""
    return [
        ConvexTestFunction.exp_n_kl(n, b),
        ConvexTestFunction.max_coordinate(n),
        ConvexTestFunction.squared_deviation(n, n * b),
        ConvexTestFunction.random_quadratic(n, seed),
        ConvexTestFunction.linear(np.linspace(-1.0, 1.0, n)),
    ]


def hypercube(n: int) -> np.ndarray:
    """All 2^n points of {0,1}^n as rows."""
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    return ((idx >> np.arange(n, dtype=np.int64)) & 1).astype(float)


def bernoulli_extreme_expectation(f: ConvexTestFunction, biases) -> float:
    """E[f(Y)] for independent Y_i ~ Bernoulli(b_i), by enumerating {0,1}^n."""
    biases = np.atleast_1d(np.asarray(biases, dtype=float))
    n = biases.size
    if n > MAX_ENUM_N:
        raise ValueError(f"enumeration needs n <= {MAX_ENUM_N}, got {n}")
    if np.any((biases < 0) | (biases > 1)):
        raise ValueError("biases must lie in [0, 1]")
    if n != f.n:
        raise ValueError("f and biases disagree on n")
    eta = hypercube(n)
    weights = np.prod(np.where(eta == 1.0, biases, 1.0 - biases), axis=1)
    values = f(eta)
    mask = weights > 0
    return math.fsum(weights[mask] * values[mask])


# --- Monte-Carlo checks ---------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    estimate: float
    se: float
    bound: float
    samples: int
    slack: float
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def unit_sequence(spec: ScenarioSpec, U: np.ndarray) -> tuple[np.ndarray, float]:
    """Paths of a sequence scenario mapped into [0, 1], with their conditional mean.

    mds paths are shifted by -alpha and scaled by 1/(beta - alpha).
    """
    trace = evolve(spec, U)
    if spec.kind == "mds_bounded":
        width = spec.beta - spec.alpha
        return (trace.Z - spec.alpha) / width, -spec.alpha / width
    if spec.kind == "iw_sampling":
        raise ValueError("comparison checks need a sequence scenario")
    return trace.X, spec.b


def _mc_values(spec: ScenarioSpec, samples: int, seed: int, fn) -> np.ndarray:
    """Evaluate ``fn(U)`` on fixed-size chunks, chunk j seeded by substream(seed, j)."""
    samples = check_positive_int(samples, "mc_samples")
    out = []
    for j, start in enumerate(range(0, samples, CHUNK)):
        size = min(CHUNK, samples - start)
        U = substream(seed, j).random((size, spec.n, spec.uniforms_per_round))
        out.append(fn(U))
    return np.concatenate(out, axis=0)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    m = values.shape[0]
    mean = math.fsum(values) / m
    if m < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (m - 1)
    return mean, math.sqrt(var / m)


def comparison_check(
    f: ConvexTestFunction, spec: ScenarioSpec, mc_samples: int = 1_000_000, seed: int = 0
) -> CheckResult:
    """E f(X) for a dependent [0, 1] sequence against E f(Y) for independent Bernoullis.

    Passes when the Monte-Carlo estimate of E f(X) is at most the exact
    Bernoulli value plus four standard errors.
    """
    if spec.n > MAX_COMPARISON_N:
        raise ValueError(f"comparison checks need n <= {MAX_COMPARISON_N}, got {spec.n}")
    if f.n != spec.n:
        raise ValueError("f and the scenario disagree on n")
    b = None

    def evaluate(U):
        nonlocal b
        X, b = unit_sequence(spec, U)
        return f(X)

    values = _mc_values(spec, mc_samples, seed, evaluate)
    lhs, se = _mean_se(values)
    rhs = bernoulli_extreme_expectation(f, np.full(spec.n, b))
    return CheckResult(
        name="comparison",
        passed=lhs <= rhs + SE_MARGIN * se,
        estimate=lhs,
        se=se,
        bound=rhs,
        samples=int(values.shape[0]),
        slack=rhs + SE_MARGIN * se - lhs,
        params={"f": f.describe(), "scenario": spec.to_dict(), "seed": seed},
    )


def _log_mean_exp(log_values: np.ndarray) -> tuple[float, float]:
    """log of the sample mean of exp(log_values) and the relative standard error."""
    m = log_values.shape[0]
    top = log_values.max()
    scaled = np.exp(log_values - top)
    mean, se = _mean_se(scaled)
    return top + math.log(mean), (se / mean if mean > 0 else 0.0)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _two_point_paths(alpha: np.ndarray, beta: np.ndarray, U: np.ndarray) -> np.ndarray:
    width = beta - alpha
    with np.errstate(invalid="ignore", divide="ignore"):
        p_high = np.where(width > 0, -alpha / width, 0.0)
    return np.where(U < p_high, beta, alpha)


def hoeffding_mgf_check(
    ranges, lam: float, mc_samples: int = 1_000_000, seed: int = 0
) -> CheckResult:
    """E[exp(lam M_n)] against exp(lam^2/8 sum (beta_i - alpha_i)^2).

    Increments are independent two-point variables on {alpha_i, beta_i} with
    mean zero, the extremal law for a range. Values are compared in log space;
    the check passes if estimate <= bound * (1 + 4 relative se).
    """
    alpha, beta = as_ranges(ranges)
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    n = alpha.size
    w2 = math.fsum((beta - alpha) ** 2)
    log_bound = lam * lam * w2 / 8.0
    samples = check_positive_int(mc_samples, "mc_samples")
    logs = []
    for j, start in enumerate(range(0, samples, CHUNK)):
        size = min(CHUNK, samples - start)
        U = substream(seed, j).random((size, n))
        logs.append(lam * _two_point_paths(alpha, beta, U).sum(axis=1))
    log_est, rse = _log_mean_exp(np.concatenate(logs))
    log_limit = log_bound + math.log1p(SE_MARGIN * rse)
    return CheckResult(
        name="hoeffding-mgf",
        passed=log_est <= log_limit,
        estimate=_exp(log_est),
        se=_exp(log_est) * rse,
        bound=_exp(log_bound),
        samples=samples,
        slack=log_limit - log_est,
        params={"n": n, "lambda": lam, "squared_width_sum": w2, "log_estimate": log_est, "log_bound": log_bound, "seed": seed},
    )


def bernstein_mgf_check(
    spec: ScenarioSpec, lam: float, mc_samples: int = 1_000_000, seed: int = 0
) -> CheckResult:
    """E[exp(lam M_n - (e-2) lam^2 V_n)] <= 1 with the simulator's exact V_n.

    For importance-weighted fields every hypothesis is checked and the
    reported estimate is the worst one.
    """
    if spec.kind not in ("mds_bounded", "iw_sampling", "iid_bernoulli", "dependent_bounded"):
        raise ValueError(f"unsupported scenario {spec.kind!r}")
    lam = float(lam)
    if not 0.0 <= lam <= 1.0 / spec.K:
        raise ValueError(f"lambda must lie in [0, 1/K] = [0, {1.0 / spec.K!r}], got {lam!r}")

    def evaluate(U):
        trace = evolve(spec, U)
        expo = lam * trace.M[:, -1] - E_MINUS_2 * lam * lam * trace.V[:, -1]
        return expo.reshape(expo.shape[0], -1)

    expo = _mc_values(spec, mc_samples, seed, evaluate)
    worst = None
    for h in range(expo.shape[1]):
        log_est, rse = _log_mean_exp(expo[:, h])
        slack = math.log1p(SE_MARGIN * rse) - log_est
        if worst is None or slack < worst[2]:
            worst = (log_est, rse, slack)
    log_est, rse, slack = worst
    est = math.exp(log_est)
    return CheckResult(
        name="bernstein-mgf",
        passed=slack >= 0.0,
        estimate=est,
        se=est * rse,
        bound=1.0,
        samples=int(expo.shape[0]),
        slack=slack,
        params={"scenario": spec.to_dict(), "lambda": lam, "K": spec.K, "seed": seed},
    )


def exact_bernstein_two_point(alpha: float, beta: float, lam: float) -> float:
    """E[exp(lam Z - (e-2) lam^2 Var Z)] for one mean-zero step on {alpha, beta}."""
    if not alpha <= 0.0 <= beta:
        raise ValueError("need alpha <= 0 <= beta")
    if beta == alpha:
        return 1.0
    p = -alpha / (beta - alpha)
    var = -alpha * beta
    shift = E_MINUS_2 * lam * lam * var
    return p * math.exp(lam * beta - shift) + (1.0 - p) * math.exp(lam * alpha - shift)


def scalar_inequality_checks(step: float = 1e-4) -> dict:
    """e^x <= 1 + x + (e-2) x^2 on [-50, 1] and 1 + x <= e^x on [-50, 50].

    Reports the worst violation of each (positive means violated) over a grid.
    """
    x1 = np.linspace(-50.0, 1.0, int(round(51.0 / step)) + 1)
    gap1 = np.exp(x1) - (1.0 + x1 + E_MINUS_2 * x1 * x1)
    x2 = np.linspace(-50.0, 50.0, int(round(100.0 / step)) + 1)
    gap2 = (1.0 + x2) - np.exp(x2)
    out = {}
    for name, x, gap in (("quadratic_exp_bound", x1, gap1), ("linear_exp_bound", x2, gap2)):
        i = int(np.argmax(gap))
        out[name] = {
            "points": int(x.size),
            "max_violation": float(gap[i]),
            "argmax": float(x[i]),
            "violations": int(np.sum(gap > SCALAR_ATOL)),
            "passed": bool(gap[i] <= SCALAR_ATOL),
        }
    out["passed"] = all(v["passed"] for v in out.values() if isinstance(v, dict))
    return out


def markov_check(spec: ScenarioSpec, delta: float, mc_samples: int = 1_000_000, seed: int = 0) -> CheckResult:
    """P(X > E[X]/delta) <= delta for X = exp(n kl(S_n/n || b)) on a [0, 1] sequence.

    E[X] is the Monte-Carlo mean; passes within a 3 sigma binomial band.
    """
    delta = check_delta(delta)

    def evaluate(U):
        X, b = unit_sequence(spec, U)
        mean = np.clip(X.mean(axis=1), 0.0, 1.0)
        return np.exp(spec.n * bernoulli_kl(mean, b))

    values = _mc_values(spec, mc_samples, seed, evaluate)
    m = values.shape[0]
    mean, _ = _mean_se(values)
    rate = float(np.mean(values > mean / delta))
    band = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / m)
    return CheckResult(
        name="markov",
        passed=rate <= band,
        estimate=rate,
        se=math.sqrt(delta * (1.0 - delta) / m),
        bound=band,
        samples=m,
        slack=band - rate,
        params={"scenario": spec.to_dict(), "delta": delta, "mean": mean, "seed": seed},
    )


# --- suite ----------------------------------------------------------------

BIAS_GRID = np.round(np.arange(1, 100) / 100.0, 2)
CHECKS = ("exact-mgf", "enumeration", "comparison", "hoeffding-mgf", "bernstein-mgf", "scalar", "markov")


def exact_mgf_sweep(n_max: int = MAX_MGF_N, biases=BIAS_GRID) -> dict:
    """exact_mgf_kl over n = 1..n_max and a bias grid.

    Checks value <= n + 1 everywhere and sqrt(n) <= value <= 2 sqrt(n) for n >= 8.
    """
    n_max = check_positive_int(n_max, "n_max")
    if n_max > MAX_MGF_N:
        raise ValueError(f"n_max must be at most {MAX_MGF_N}")
    biases = np.asarray(biases, dtype=float)
    worst_ratio, worst_at = -math.inf, None
    band_failures = []
    for n in range(1, n_max + 1):
        values = exact_mgf_kl_grid(n, biases)
        ratios = values / (n + 1)
        i = int(np.argmax(ratios))
        if ratios[i] > worst_ratio:
            worst_ratio, worst_at = float(ratios[i]), (n, float(biases[i]))
        if n >= 8:
            root = math.sqrt(n)
            bad = (values < root) | (values > 2.0 * root)
            band_failures.extend((n, float(b), float(v)) for b, v in zip(biases[bad], values[bad]))
    return {
        "n_max": n_max,
        "biases": int(biases.size),
        "max_value_over_n_plus_1": worst_ratio,
        "argmax": list(worst_at),
        "upper_bound_passed": worst_ratio <= 1.0,
        "sqrt_band_failures": len(band_failures),
        "sqrt_band_examples": [list(x) for x in band_failures[:10]],
        "sqrt_band_passed": not band_failures,
        "passed": worst_ratio <= 1.0 and not band_failures,
    }


def enumeration_agreement(n_max: int = MAX_ENUM_N, biases=(0.1, 0.3, 0.5, 0.77)) -> dict:
    """Largest relative gap between enumeration and the binomial sum for exp-n-kl."""
    worst = 0.0
    for n in range(1, n_max + 1):
        for b in biases:
            f = ConvexTestFunction.exp_n_kl(n, b)
            a = bernoulli_extreme_expectation(f, np.full(n, b))
            e = exact_mgf_kl(n, b)
            worst = max(worst, abs(a - e) / e)
    return {"n_max": n_max, "max_relative_gap": worst, "passed": worst <= 1e-12}


def dependent_specs(n: int) -> list[ScenarioSpec]:
    """The three dependent [0, 1] processes used by the comparison checks."""
    return [
        ScenarioSpec.dependent_bounded(0.4, 0.5, n),
        ScenarioSpec.dependent_bounded(0.7, 0.9, n),
        ScenarioSpec.mds_bounded(-0.3, 0.7, n, shape="adaptive"),
    ]


def comparison_suite(ns=(4, 8, 12), mc_samples: int = 1_000_000, seed: int = 0) -> list[CheckResult]:
    results = []
    for n in ns:
        for spec in dependent_specs(n):
            b = spec.b if spec.kind != "mds_bounded" else -spec.alpha / (spec.beta - spec.alpha)
            for f in convex_catalog(n, b, seed):
                results.append(comparison_check(f, spec, mc_samples, seed))
    return results


def hoeffding_suite(mc_samples: int = 1_000_000, seed: int = 0) -> list[CheckResult]:
    cases = [
        ((np.full(50, -0.5), np.full(50, 0.5)), 0.2),
        ((np.full(20, -0.3), np.full(20, 0.7)), 1.0),
        ((np.full(10, -1.0), np.full(10, 2.0)), 0.5),
        ((np.linspace(-0.1, -0.9, 30), np.linspace(0.9, 0.1, 30)), 2.0),
        ((np.zeros(5), np.zeros(5)), 3.0),
    ]
    return [hoeffding_mgf_check(r, lam, mc_samples, seed) for r, lam in cases]


def bernstein_suite(mc_samples: int = 1_000_000, seed: int = 0) -> list[CheckResult]:
    cases = [
        ScenarioSpec.iw_sampling([0.2, 0.8], 0.25, 20),
        ScenarioSpec.iw_sampling([0.1, 0.4, 0.9], 0.2, 20, adaptive=True),
        ScenarioSpec.mds_bounded(-0.3, 0.7, 30),
        ScenarioSpec.mds_bounded(-0.5, 0.5, 30, shape="adaptive"),
        ScenarioSpec.dependent_bounded(0.2, 0.8, 30),
    ]
    return [bernstein_mgf_check(s, 1.0 / s.K, mc_samples, seed) for s in cases]


def verification_report(
    checks=CHECKS, n_max: int = MAX_MGF_N, mc_samples: int = 200_000, seed: int = 0
) -> dict:
    """Run the selected checks and collect a JSON-ready report."""
    checks = tuple(checks)
    for name in checks:
        if name not in CHECKS:
            raise ValueError(f"unknown check {name!r}; expected one of {CHECKS}")
    report: dict = {"seed": seed, "mc_samples": mc_samples, "checks": {}}
    for name in checks:
        if name == "exact-mgf":
            entry = exact_mgf_sweep(n_max)
        elif name == "enumeration":
            entry = enumeration_agreement()
        elif name == "scalar":
            entry = scalar_inequality_checks()
        elif name == "markov":
            results = [markov_check(s, 0.05, mc_samples, seed) for s in dependent_specs(10)]
            entry = {"results": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
        else:
            suite = {"comparison": comparison_suite, "hoeffding-mgf": hoeffding_suite, "bernstein-mgf": bernstein_suite}
            if name == "comparison":
                results = suite[name](mc_samples=mc_samples, seed=seed)
            else:
                results = suite[name](mc_samples, seed)
            entry = {
                "results": [r.to_dict() for r in results],
                "min_slack": min(r.slack for r in results),
                "passed": all(r.passed for r in results),
            }
        report["checks"][name] = entry
    report["passed"] = all(e["passed"] for e in report["checks"].values())
    return report
