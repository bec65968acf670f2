"""High-probability bounds for a single martingale.

The kl bound controls the drift ``b`` of a [0, 1]-valued sequence from its
running sum ``S_n``. The Hoeffding-Azuma and Bernstein bounds control
``|M_n|`` for a martingale difference sequence with known ranges or a
variance bound.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from ._validation import (
    check_delta,
    check_nonnegative,
    check_positive,
    check_positive_int,
    check_ratio,
)
from .core import kl_inv_lower, kl_inv_upper, pinsker_radius, refined_kl_upper

E_MINUS_2 = math.e - 2.0
DEFAULT_C = 1.1


class Branch(str, Enum):
    GRID_OK = "grid_ok"
    VARIANCE_SMALL = "variance_small"


@dataclass(frozen=True)
class BoundResult:
    radius: float
    delta: float
    lower: float | None = None
    upper: float | None = None
    branch: Branch | None = None
    lambda_used: float | None = None
    grid_size: int | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.branch is not None:
            out["branch"] = self.branch.value
        extras = out.pop("extras")
        out.update(extras)
        return out


@dataclass(frozen=True)
class LambdaGrid:
    values: tuple[float, ...]
    ratio: float
    size: int

    @property
    def lambda_min(self) -> float:
        return self.values[0]

    @property
    def lambda_max(self) -> float:
        return self.values[-1]


def as_ranges(ranges) -> tuple[np.ndarray, np.ndarray]:
    """Split per-round ranges into ``(alpha, beta)`` arrays.

    ``ranges`` is either an ``(n, 2)`` array-like of ``[alpha_i, beta_i]`` rows
    or a pair ``(alpha, beta)`` of length-n sequences.
    """
    if isinstance(ranges, tuple) and len(ranges) == 2 and np.ndim(ranges[0]) == 1:
        alpha = np.asarray(ranges[0], dtype=float)
        beta = np.asarray(ranges[1], dtype=float)
    else:
        arr = np.asarray(ranges, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("ranges must be an (n, 2) array of [alpha, beta] rows")
        alpha, beta = arr[:, 0], arr[:, 1]
    if alpha.size == 0:
        raise ValueError("ranges must contain at least one round")
    if alpha.shape != beta.shape:
        raise ValueError("alpha and beta must have the same length")
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise ValueError("ranges must be finite")
    if np.any(alpha > beta):
        raise ValueError("each range needs alpha <= beta")
    if np.any(alpha > 0) or np.any(beta < 0):
        raise ValueError("a martingale difference range must satisfy alpha <= 0 <= beta")
    return alpha, beta


def squared_width_sum(ranges) -> float:
    alpha, beta = as_ranges(ranges)
    return math.fsum((beta - alpha) ** 2)


def kl_drift_bound(S_n: float, n: int, delta: float) -> BoundResult:
    """Confidence interval for the drift b from kl(S_n/n || b) <= ln((n+1)/delta)/n.

    ``radius`` is the kl-space radius; ``lower``/``upper`` come from exact
    inversion. ``extras`` carries the Pinsker interval and the closed-form
    refined upper endpoint, both clamped to [0, 1].
    """
    n = check_positive_int(n)
    delta = check_delta(delta)
    S_n = float(S_n)
    if not 0.0 <= S_n <= n:
        raise ValueError(f"S_n must lie in [0, n] = [0, {n}], got {S_n!r}")
    center = S_n / n
    eps = math.log((n + 1) / delta) / n
    half = pinsker_radius(eps)
    return BoundResult(
        radius=eps,
        delta=delta,
        lower=kl_inv_lower(center, eps),
        upper=kl_inv_upper(center, eps),
        extras={
            "center": center,
            "pinsker_lower": max(center - half, 0.0),
            "pinsker_upper": min(center + half, 1.0),
            "refined_upper": min(refined_kl_upper(center, eps), 1.0),
        },
    )


def hoeffding_azuma_radius(ranges, delta: float) -> BoundResult:
    """Two-sided Hoeffding-Azuma radius sqrt(ln(2/delta)/2 * sum (beta_i - alpha_i)^2)."""
    delta = check_delta(delta)
    w2 = squared_width_sum(ranges)
    radius = math.sqrt(0.5 * math.log(2.0 / delta) * w2)
    return BoundResult(radius=radius, delta=delta, extras={"squared_width_sum": w2})


def grid_exponent(n: int, delta: float, c: float) -> int:
    """Number m of geometric grid points strictly below 1/K (0 when the range is empty)."""
    span = E_MINUS_2 * n / math.log(2.0 / delta)
    if span <= 1.0:
        return 0
    return math.ceil(math.log(math.sqrt(span)) / math.log(c))


def lambda_grid(K: float, n: int, delta: float, c: float = DEFAULT_C) -> LambdaGrid:
    """Geometric lambda grid covering [lambda_0, 1/K] with ratio at most c.

    lambda_i = c^i * lambda_0 for i < m, followed by 1/K. The union-bound size
    ``size`` is m + 1 even if the last geometric point coincides with 1/K.
    """
    K = check_positive(K, "K")
    n = check_positive_int(n)
    delta = check_delta(delta)
    c = check_ratio(c)
    top = 1.0 / K
    m = grid_exponent(n, delta, c)
    if m == 0:
        return LambdaGrid(values=(top,), ratio=c, size=1)
    lam0 = top * math.sqrt(math.log(2.0 / delta) / (E_MINUS_2 * n))
    values = [lam0 * c**i for i in range(m)]
    if values[-1] != top:
        values.append(top)
    return LambdaGrid(values=tuple(values), ratio=c, size=m + 1)


def _check_lambda(lam: float, K: float) -> float:
    lam = float(lam)
    if not 0.0 < lam <= 1.0 / K:
        raise ValueError(f"lambda must lie in (0, 1/K] = (0, {1.0 / K!r}], got {lam!r}")
    return lam


def bernstein_fixed_lambda(V_n: float, lam: float, delta: float, K: float = 1.0) -> BoundResult:
    """ln(2/delta)/lam + lam (e-2) V_n, valid for any lam in (0, 1/K]."""
    V_n = check_nonnegative(V_n, "V_n")
    delta = check_delta(delta)
    K = check_positive(K, "K")
    lam = _check_lambda(lam, K)
    radius = math.log(2.0 / delta) / lam + lam * E_MINUS_2 * V_n
    return BoundResult(radius=radius, delta=delta, lambda_used=lam)


def grid_bernstein(complexity: float, V: float, K: float, n: int, delta: float, c: float):
    """Shared core of the grid-based Bernstein bounds.

    ``complexity`` is an extra additive term inside the logarithmic budget
    (the KL term for weighted averages, 0 for a single martingale). Returns
    ``(radius, branch, lambda_used, grid)``. ``V`` is capped at K^2 n, which
    the true variance can never exceed.
    """
    grid = lambda_grid(K, n, delta, c)
    V = min(V, K * K * n)
    budget = complexity + math.log(2.0 * grid.size / delta)
    if math.isinf(budget):
        return math.inf, Branch.VARIANCE_SMALL, grid.lambda_max, grid
    lam_star = math.sqrt(budget / (E_MINUS_2 * V)) if V > 0.0 else math.inf
    if lam_star <= 1.0 / K:
        radius = (1.0 + c) * math.sqrt(E_MINUS_2 * V * budget)
        below = [lam for lam in grid.values if lam <= lam_star]
        lam_used = below[-1] if below else grid.lambda_min
        return radius, Branch.GRID_OK, lam_used, grid
    return 2.0 * K * budget, Branch.VARIANCE_SMALL, grid.lambda_max, grid


def bernstein_adaptive(
    V_n_upper: float, K: float, n: int, delta: float, c: float = DEFAULT_C
) -> BoundResult:
    """Bernstein bound with lambda picked from a geometric grid after seeing the data.

    ``V_n_upper`` may be any (possibly sample-dependent) upper bound on the
    conditional variance V_n.
    """
    V = check_nonnegative(V_n_upper, "V_n_upper")
    delta = check_delta(delta)
    radius, branch, lam, grid = grid_bernstein(0.0, V, K, n, delta, c)
    return BoundResult(
        radius=radius,
        delta=delta,
        branch=branch,
        lambda_used=lam,
        grid_size=grid.size,
        extras={"c": grid.ratio},
    )
