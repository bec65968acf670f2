"""Input checks shared by every public entry point.

All failures raise ``ValueError`` so callers (and the CLI) can treat bad
input uniformly.
"""
from __future__ import annotations

import math

import numpy as np

DIST_ATOL = 1e-12


def check_prob(x: float, name: str = "p") -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in the open interval (0, 1), got {delta!r}")
    return delta


def check_nonnegative(x: float, name: str) -> float:
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise ValueError(f"{name} must be nonnegative, got {x!r}")
    return x


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if math.isnan(x) or x <= 0.0:
        raise ValueError(f"{name} must be positive, got {x!r}")
    return x


def check_positive_int(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_ratio(c: float) -> float:
    c = float(c)
    if not c > 1.0:
        raise ValueError(f"grid ratio c must be > 1, got {c!r}")
    return c


def as_distribution(weights, name: str = "distribution") -> np.ndarray:
    """Return ``weights`` as a float array after checking it is a probability vector."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d weight vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError(f"{name} must have finite nonnegative entries")
    total = math.fsum(w)
    if abs(total - 1.0) > DIST_ATOL:
        raise ValueError(f"{name} must sum to 1 (got {total!r})")
    return w


def check_same_length(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"length mismatch in {what}: {a.shape[0]} vs {b.shape[0]}")
