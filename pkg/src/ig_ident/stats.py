"""Small statistical helpers: KS distance, Kolmogorov bands, Wilson intervals."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

# Two-sided 95% normal quantile.
Z95 = 1.959963984540054

# Asymptotic Kolmogorov quantile at 99%: P(sqrt(N) D > K99) = 0.01.
K99 = 1.6276236115189502


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance sup |F_N - F|."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_band(n: int, quantile: float = K99) -> float:
    return quantile / math.sqrt(n)


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval ``(center, halfwidth)`` for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return center, half
