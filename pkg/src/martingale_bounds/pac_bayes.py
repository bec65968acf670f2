"""Bounds on weighted averages of many martingales indexed by a finite set H.

Every bound holds simultaneously for all averaging distributions ``rho``;
the price of an individual ``rho`` is its divergence KL(rho||pi) from a
reference distribution ``pi`` fixed in advance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import (
    as_distribution,
    check_delta,
    check_nonnegative,
    check_positive,
    check_positive_int,
    check_ratio,
    check_same_length,
)
from .core import discrete_kl, kl_inv_lower, kl_inv_upper, pinsker_radius
from .individual import (
    DEFAULT_C,
    E_MINUS_2,
    BoundResult,
    _check_lambda,
    as_ranges,
    grid_bernstein,
)


@dataclass(frozen=True)
class PacBayesResult(BoundResult):
    kl_term: float = 0.0
    epsilon_rho: float | None = None


@dataclass(frozen=True)
class HypothesisSummary:
    """Per-hypothesis statistics after n rounds.

    ``S``: sums of [0, 1]-valued observations (kl bound). ``M``: martingale
    values. ``V``: conditional variances. ``ranges``: per-round ``(alpha,
    beta)`` shared by all hypotheses. ``K``: bound on every |increment|.
    Only the fields a given bound needs must be present.
    """

    n: int
    S: np.ndarray | None = None
    M: np.ndarray | None = None
    V: np.ndarray | None = None
    ranges: tuple[np.ndarray, np.ndarray] | None = None
    K: float | None = None

    def __post_init__(self):
        check_positive_int(self.n)
        sizes = set()
        for name in ("S", "M", "V"):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.atleast_1d(np.asarray(value, dtype=float))
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be a finite 1-d vector over hypotheses")
            object.__setattr__(self, name, arr)
            sizes.add(arr.size)
        if len(sizes) > 1:
            raise ValueError("S, M and V must have one entry per hypothesis")
        if self.S is not None and np.any((self.S < 0) | (self.S > self.n)):
            raise ValueError("every S(h) must lie in [0, n]")
        if self.V is not None and np.any(self.V < 0):
            raise ValueError("variances must be nonnegative")
        if self.K is not None:
            object.__setattr__(self, "K", check_positive(self.K, "K"))
            if self.V is not None and np.any(self.V > self.K**2 * self.n * (1 + 1e-12)):
                raise ValueError("variances cannot exceed K^2 n")
        if self.ranges is not None:
            alpha, beta = as_ranges(self.ranges)
            if alpha.size != self.n:
                raise ValueError("ranges must have one entry per round")
            object.__setattr__(self, "ranges", (alpha, beta))

    @property
    def size(self) -> int | None:
        for arr in (self.S, self.M, self.V):
            if arr is not None:
                return arr.size
        return None


def _weights(summary: HypothesisSummary, rho, pi) -> tuple[np.ndarray, np.ndarray, float]:
    rho = as_distribution(rho, "rho")
    pi = as_distribution(pi, "pi")
    check_same_length(rho, pi, "rho/pi")
    size = summary.size
    if size is not None and size != rho.size:
        raise ValueError(f"rho has {rho.size} entries but the summary covers {size} hypotheses")
    return rho, pi, discrete_kl(rho, pi)


def _require(summary: HypothesisSummary, *names: str) -> None:
    missing = [name for name in names if getattr(summary, name) is None]
    if missing:
        raise ValueError(f"summary is missing {', '.join(missing)}")


def _average(values: np.ndarray, rho: np.ndarray) -> float:
    return math.fsum(values * rho)


def change_of_measure_gap(phi, rho, pi) -> tuple[float, float]:
    """Both sides of <phi, rho> <= KL(rho||pi) + ln <e^phi, pi>."""
    phi = np.asarray(phi, dtype=float)
    rho = as_distribution(rho, "rho")
    pi = as_distribution(pi, "pi")
    check_same_length(rho, pi, "rho/pi")
    check_same_length(phi, rho, "phi/rho")
    lhs = math.fsum(phi[rho > 0] * rho[rho > 0])
    kl = discrete_kl(rho, pi)
    if math.isinf(kl):
        return lhs, math.inf
    support = pi > 0
    rhs = kl + float(logsumexp(phi[support], b=pi[support]))
    return lhs, rhs


def pb_kl_bound(summary: HypothesisSummary, rho, pi, delta: float) -> PacBayesResult:
    """kl(<S/n, rho> || <b, rho>) <= (KL(rho||pi) + ln((n+1)/delta)) / n.

    ``lower``/``upper`` bound <b, rho> by inverting the kl; ``extras`` adds the
    Pinsker interval.
    """
    _require(summary, "S")
    delta = check_delta(delta)
    rho, pi, kl = _weights(summary, rho, pi)
    n = summary.n
    eps = (kl + math.log((n + 1) / delta)) / n
    center = min(max(_average(summary.S / n, rho), 0.0), 1.0)
    half = pinsker_radius(eps)
    return PacBayesResult(
        radius=eps,
        delta=delta,
        lower=kl_inv_lower(center, eps),
        upper=kl_inv_upper(center, eps),
        kl_term=kl,
        extras={
            "center": center,
            "pinsker_radius": half,
            "pinsker_lower": max(center - half, 0.0),
            "pinsker_upper": min(center + half, 1.0),
        },
    )


def pb_pinsker_bound(summary: HypothesisSummary, rho, pi, delta: float) -> PacBayesResult:
    """|<S/n - b, rho>| <= sqrt((KL(rho||pi) + ln((n+1)/delta)) / (2n))."""
    kl_result = pb_kl_bound(summary, rho, pi, delta)
    return PacBayesResult(
        radius=kl_result.extras["pinsker_radius"],
        delta=kl_result.delta,
        lower=kl_result.extras["pinsker_lower"],
        upper=kl_result.extras["pinsker_upper"],
        kl_term=kl_result.kl_term,
        extras={"center": kl_result.extras["center"]},
    )


def _ha_value(kl: float, log_term: float, lam: float, w2: float) -> float:
    return (kl + log_term) / lam + lam * w2 / 8.0


def pb_ha_fixed_lambda(summary: HypothesisSummary, rho, pi, lam: float, delta: float) -> PacBayesResult:
    """(KL(rho||pi) + ln(2/delta)) / lam + (lam/8) sum (beta_i - alpha_i)^2."""
    _require(summary, "ranges")
    delta = check_delta(delta)
    lam = check_positive(lam, "lambda")
    _, _, kl = _weights(summary, rho, pi)
    alpha, beta = summary.ranges
    w2 = math.fsum((beta - alpha) ** 2)
    radius = _ha_value(kl, math.log(2.0 / delta), lam, w2)
    return PacBayesResult(radius=radius, delta=delta, lambda_used=lam, kl_term=kl)


def ha_grid_index(kl: float, delta: float, c: float) -> int:
    """Grid index floor(ln(KL / ln(2/delta) + 1) / (2 ln c))."""
    return math.floor(math.log(kl / math.log(2.0 / delta) + 1.0) / (2.0 * math.log(c)))


def ha_epsilon(kl: float, delta: float, c: float) -> float | None:
    """Closed-form slack term of the adaptive Hoeffding-Azuma bound; None where undefined (KL = 0)."""
    if kl <= 0.0 or math.isinf(kl):
        return None
    return math.log(2.0) / (2.0 * math.log(c)) * (1.0 + math.log(kl / math.log(2.0 / delta)))


def pb_ha_adaptive(summary: HypothesisSummary, rho, pi, delta: float, c: float = DEFAULT_C) -> PacBayesResult:
    """Hoeffding-Azuma bound with lambda chosen per rho from an infinite geometric grid.

    Grid point i is lambda_i = c^i sqrt(8 ln(2/delta) / W), W = sum of squared
    range widths, and carries confidence delta 2^-(i+1); the weighted union
    bound makes every grid point valid at once. The radius is the smallest
    grid value, which is nondecreasing in KL(rho||pi). ``extras`` records the
    index picked by the explicit rule (``grid_index``), the radius at that
    index, and the sqrt-form bound where its slack term is defined.
    """
    _require(summary, "ranges")
    delta = check_delta(delta)
    c = check_ratio(c)
    _, _, kl = _weights(summary, rho, pi)
    alpha, beta = summary.ranges
    w2 = math.fsum((beta - alpha) ** 2)
    base_log = math.log(2.0 / delta)
    if math.isinf(kl):
        return PacBayesResult(radius=math.inf, delta=delta, kl_term=kl)
    eps_rho = ha_epsilon(kl, delta, c)
    extras = {"c": c, "grid_index": ha_grid_index(kl, delta, c)}
    if eps_rho is not None:
        extras["closed_form"] = (1.0 + c) / (2.0 * math.sqrt(2.0)) * math.sqrt(
            max(kl + base_log + eps_rho, 0.0) * w2
        )
    if w2 == 0.0:
        extras["selected_radius"] = 0.0
        return PacBayesResult(radius=0.0, delta=delta, kl_term=kl, epsilon_rho=eps_rho, extras=extras)
    lam_base = math.sqrt(8.0 * base_log / w2)

    def value(i: int) -> float:
        # confidence delta 2^-(i+1) for grid point i
        return _ha_value(kl, base_log + (i + 1) * math.log(2.0), c**i * lam_base, w2)

    extras["selected_radius"] = value(extras["grid_index"])
    best_i, best = 0, value(0)
    i = 1
    # the lambda * W / 8 term alone grows geometrically, so the scan ends
    while c**i * lam_base * w2 / 8.0 <= best:
        v = value(i)
        if v < best:
            best_i, best = i, v
        i += 1
    return PacBayesResult(
        radius=best,
        delta=delta,
        lambda_used=c**best_i * lam_base,
        kl_term=kl,
        epsilon_rho=eps_rho,
        extras=extras,
    )


def pb_bernstein_fixed_lambda(summary: HypothesisSummary, rho, pi, lam: float, delta: float) -> PacBayesResult:
    """(KL(rho||pi) + ln(2/delta)) / lam + (e-2) lam <V, rho>, for lam in (0, 1/K]."""
    _require(summary, "V", "K")
    delta = check_delta(delta)
    lam = _check_lambda(lam, summary.K)
    rho, _, kl = _weights(summary, rho, pi)
    v_rho = _average(summary.V, rho)
    radius = (kl + math.log(2.0 / delta)) / lam + E_MINUS_2 * lam * v_rho
    return PacBayesResult(radius=radius, delta=delta, lambda_used=lam, kl_term=kl)


def pb_bernstein_adaptive(
    summary: HypothesisSummary,
    rho,
    pi,
    delta: float,
    c: float = DEFAULT_C,
    V_upper: float | None = None,
) -> PacBayesResult:
    """Bernstein bound on |<M, rho>| with lambda picked from a finite geometric grid.

    ``V_upper`` bounds <V, rho> and may depend on the sample; it defaults to
    the exact average of ``summary.V``.
    """
    _require(summary, "K")
    delta = check_delta(delta)
    rho, _, kl = _weights(summary, rho, pi)
    if V_upper is None:
        _require(summary, "V")
        V_upper = _average(summary.V, rho)
    V_upper = check_nonnegative(V_upper, "V_upper")
    radius, branch, lam, grid = grid_bernstein(kl, V_upper, summary.K, summary.n, delta, c)
    return PacBayesResult(
        radius=radius,
        delta=delta,
        branch=branch,
        lambda_used=lam,
        grid_size=grid.size,
        kl_term=kl,
        extras={"c": grid.ratio},
    )


def gibbs_posterior(scores, pi, gamma: float) -> np.ndarray:
    """rho(h) proportional to pi(h) exp(-gamma * scores(h)).

    ``gamma = inf`` gives the limit: pi restricted to the minimum-score
    hypotheses in its support.
    """
    scores = np.asarray(scores, dtype=float)
    pi = as_distribution(pi, "pi")
    check_same_length(scores, pi, "scores/pi")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    gamma = check_nonnegative(gamma, "gamma")
    support = pi > 0
    rho = np.zeros_like(pi)
    if math.isinf(gamma):
        best = scores[support].min()
        mask = support & (scores == best)
        rho[mask] = pi[mask] / math.fsum(pi[mask])
        return rho
    logits = np.log(pi[support]) - gamma * scores[support]
    rho[support] = np.exp(logits - logsumexp(logits))
    return rho / math.fsum(rho)
