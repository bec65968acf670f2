"""Binary and discrete relative entropy, with numerical inversion of the binary one."""
from __future__ import annotations

import math
import struct

import numpy as np

from ._validation import (
    as_distribution,
    check_nonnegative,
    check_positive,
    check_prob,
    check_same_length,
)

DEFAULT_TOL = 1e-12
MAX_ITER = 200


SERIES_CUTOFF = 0.1
# below this relative distance |q - p| / min(p, 1 - p) the cancellation-free form is used
NEAR_FRACTION = 0.5
_SERIES_TERMS = 9


def _x_minus_log1p(x):
    """x - log(1 + x) without cancellation for small |x| (array version).

    With t = x / (2 + x): x - log1p(x) = x^2 / (2 + x) - 2 (t^3/3 + t^5/5 + ...).
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = x - np.log1p(x)
        t = x / (2.0 + x)
        t2 = t * t
        tail = np.zeros_like(t)
        for k in range(_SERIES_TERMS, 0, -1):
            tail = tail * t2 + 1.0 / (2 * k + 1)
        series = x * x / (2.0 + x) - 2.0 * t * t2 * tail
    return np.where(np.abs(x) < SERIES_CUTOFF, series, direct)


def _x_minus_log1p_scalar(x: float) -> float:
    if abs(x) >= SERIES_CUTOFF:
        return x - math.log1p(x)
    t = x / (2.0 + x)
    t2 = t * t
    tail = 0.0
    for k in range(_SERIES_TERMS, 0, -1):
        tail = tail * t2 + 1.0 / (2 * k + 1)
    return x * x / (2.0 + x) - 2.0 * t * t2 * tail


def _log(x):
    """ln x, via log1p(x - 1) above 1/2 where x - 1 is exact."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0.5, np.log1p(x - 1.0), np.log(x))


def _log_complement(x):
    """ln(1 - x), via log1p(-x) below 1/2.

    Paired with ``_log`` so that _log_complement(x) == _log(1 - x) whenever
    1 - x is exact, which makes kl(p||q) = kl(1-p||1-q) hold bit for bit.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x < 0.5, np.log1p(-x), np.log(1.0 - x))


def _log_scalar(x: float) -> float:
    if x > 0.5:
        return math.log1p(x - 1.0)
    return math.log(x) if x > 0.0 else -math.inf


def _log_complement_scalar(x: float) -> float:
    if x < 0.5:
        return math.log1p(-x)
    return math.log(1.0 - x) if x < 1.0 else -math.inf


def bernoulli_kl(p, q):
    """kl(p||q) between Bernoulli(p) and Bernoulli(q).

    Accepts scalars or broadcastable arrays; scalar input gives a float.
    Uses 0 ln 0 = 0 and returns +inf when q is 0 or 1 while p differs from it.
    When q is close to an interior p the two terms are written as
    p g(d/p) + (1-p) g(-d/(1-p)) with d = q - p and g(x) = x - ln(1+x), so
    the first-order parts cancel exactly and kl keeps full relative accuracy.
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1) | np.isnan(p_arr)):
        raise ValueError("p must lie in [0, 1]")
    if np.any((q_arr < 0) | (q_arr > 1) | np.isnan(q_arr)):
        raise ValueError("q must lie in [0, 1]")
    p_arr, q_arr = np.broadcast_arrays(p_arr, q_arr)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d = q_arr - p_arr
        near = p_arr * _x_minus_log1p(d / p_arr) + (1 - p_arr) * _x_minus_log1p(-d / (1 - p_arr))
        far = p_arr * (_log(p_arr) - _log(q_arr)) + (1 - p_arr) * (
            _log_complement(p_arr) - _log_complement(q_arr)
        )
        interior = np.where(np.abs(d) <= NEAR_FRACTION * np.minimum(p_arr, 1 - p_arr), near, far)
        at_zero = -_log_complement(q_arr)
        at_one = -_log(q_arr)
    out = np.where(p_arr == 0, at_zero, np.where(p_arr == 1, at_one, interior))
    out = np.where((q_arr == 0) | (q_arr == 1), np.inf, out)
    out = np.where(p_arr == q_arr, 0.0, np.maximum(out, 0.0))
    if out.ndim == 0:
        return float(out)
    return out


def _kl_scalar(p: float, q: float) -> float:
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    if p == 0.0:
        return -_log_complement_scalar(q)
    if p == 1.0:
        return -_log_scalar(q)
    d = q - p
    if abs(d) <= NEAR_FRACTION * min(p, 1.0 - p):
        value = p * _x_minus_log1p_scalar(d / p) + (1.0 - p) * _x_minus_log1p_scalar(-d / (1.0 - p))
    else:
        value = p * (_log_scalar(p) - _log_scalar(q)) + (1.0 - p) * (
            _log_complement_scalar(p) - _log_complement_scalar(q)
        )
    return max(value, 0.0)


def _midpoint(lo: float, hi: float) -> float:
    """Midpoint of two nonnegative floats in their bit ordering.

    Halving the count of representable floats in the bracket, rather than its
    width, reaches adjacent floats in at most 64 steps even for roots near 0.
    """
    a = struct.unpack("<q", struct.pack("<d", lo))[0]
    b = struct.unpack("<q", struct.pack("<d", hi))[0]
    return struct.unpack("<d", struct.pack("<q", (a + b) // 2))[0]


def _check_inversion_args(p, eps, tol):
    p = check_prob(p, "p")
    eps = check_nonnegative(eps, "eps")
    tol = check_positive(tol, "tol")
    return p, eps, tol


def kl_inv_upper(p: float, eps: float, tol: float = DEFAULT_TOL) -> float:
    """Largest q >= p with kl(p||q) <= eps.

    Bisection on the increasing branch q -> kl(p||q) over [p, 1], splitting
    the bracket at the median representable float. The loop
    keeps kl(p||lo) <= eps < kl(p||hi) and returns ``hi``, so the result is
    never below the true root. It stops when the bracket is narrower than
    ``tol`` and kl(p||hi) is within ``tol`` of ``eps``, or when no float
    remains strictly inside the bracket.
    """
    p, eps, tol = _check_inversion_args(p, eps, tol)
    if eps == 0.0:
        return p
    if p == 1.0 or math.isinf(eps):
        return 1.0
    if p == 0.0:
        return -math.expm1(-eps)
    lo, hi = p, 1.0
    for _ in range(MAX_ITER):
        mid = _midpoint(lo, hi)
        if mid <= lo or mid >= hi:
            break
        if _kl_scalar(p, mid) > eps:
            hi = mid
            if hi - lo <= tol and _kl_scalar(p, hi) - eps <= tol:
                break
        else:
            lo = mid
    return hi


def kl_inv_lower(p: float, eps: float, tol: float = DEFAULT_TOL) -> float:
    """Smallest q <= p with kl(p||q) <= eps (mirror of :func:`kl_inv_upper`)."""
    p, eps, tol = _check_inversion_args(p, eps, tol)
    if eps == 0.0:
        return p
    if p == 0.0 or math.isinf(eps):
        return 0.0
    if p == 1.0:
        return math.exp(-eps)
    lo, hi = 0.0, p
    for _ in range(MAX_ITER):
        mid = _midpoint(lo, hi)
        if mid <= lo or mid >= hi:
            break
        if _kl_scalar(p, mid) > eps:
            lo = mid
            if hi - lo <= tol and _kl_scalar(p, lo) - eps <= tol:
                break
        else:
            hi = mid
    return lo


def pinsker_radius(eps: float) -> float:
    """sqrt(eps / 2): the deviation |p - q| allowed by kl(p||q) <= eps."""
    eps = check_nonnegative(eps, "eps")
    return math.sqrt(eps / 2.0)


def refined_kl_upper(q_hat: float, eps: float) -> float:
    """q_hat + sqrt(2 q_hat eps) + 2 eps, an explicit upper bound on kl_inv_upper.

    Not clamped to 1.
    """
    q_hat = check_prob(q_hat, "q_hat")
    eps = check_nonnegative(eps, "eps")
    return q_hat + math.sqrt(2.0 * q_hat * eps) + 2.0 * eps


def discrete_kl(rho, pi) -> float:
    """KL(rho||pi) for weight vectors over the same finite index set."""
    rho = as_distribution(rho, "rho")
    pi = as_distribution(pi, "pi")
    check_same_length(rho, pi, "discrete_kl")
    support = rho > 0
    if np.any(pi[support] == 0):
        return math.inf
    r = rho[support]
    terms = r * np.log(r / pi[support])
    return max(math.fsum(terms), 0.0)
