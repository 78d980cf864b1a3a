"""Deterministic encoder, additive IG timing channel and distance-threshold identifier.

Message indices are 1-based labels ``1..M``. The identifier answers one
question per candidate ``j`` ("was message j sent?"): it accepts when the
decoding measure

    T(y, c_j) = ||y - c_j||^2 / n - (mu^2 + mu^3/lam)

satisfies ``|T| <= delta_n``. Decoding regions of different messages may
overlap; no argmin over messages is ever taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, scaling_quantities
from .errors import DomainError, InvalidInputError
from .ig_distribution import IGParams, ig_sample


@dataclass(frozen=True)
class DecodingRule:
    delta_n: float
    alpha: float

    def __post_init__(self) -> None:
        if not (self.delta_n >= 0 and self.alpha > 0):
            raise DomainError("decoding rule needs delta_n >= 0 and alpha > 0")

    @classmethod
    def for_channel(cls, params: IGParams, n: int, a: float, b: float) -> "DecodingRule":
        """Threshold ``4a / (3 n^((1-b)/2))`` and centering ``E[Z^2]``."""
        return cls(delta_n=scaling_quantities(n, a, b).delta_n, alpha=params.second_moment)


def encode(codebook: Codebook, i: int) -> np.ndarray:
    if not 1 <= i <= codebook.M:
        raise InvalidInputError(f"message index {i} outside 1..{codebook.M}")
    return codebook.codewords[i - 1].copy()


def transmit(codeword, params: IGParams, rng: np.random.Generator) -> np.ndarray:
    """Channel output ``y = c + Z`` with i.i.d. IG noise."""
    c = np.asarray(codeword, dtype=float)
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("codeword must be finite")
    return c + ig_sample(params, rng, size=c.shape)


def _pair(y, c) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if y.size != c.size:
        raise InvalidInputError(f"length mismatch: y has {y.size}, codeword has {c.size}")
    if y.size == 0:
        raise InvalidInputError("vectors must be non-empty")
    return y, c


def decoding_measure(y, c, params: IGParams) -> float:
    y, c = _pair(y, c)
    return math.fsum((y - c) ** 2) / y.size - params.second_moment


def identify(y, c_j, params: IGParams, rule: DecodingRule) -> bool:
    """Accept iff ``|T(y, c_j)| <= delta_n``."""
    return abs(decoding_measure(y, c_j, params)) <= rule.delta_n


def decoding_measures_batch(
    c_sent: np.ndarray, c_test: np.ndarray, params: IGParams, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Decoding measure against ``c_test`` for ``trials`` transmissions of ``c_sent``.

    Row sums use numpy's pairwise summation, whose error is a few ulps times
    log2(n), well inside the accuracy the thresholds need.
    """
    n = c_sent.size
    noise = ig_sample(params, rng, size=(trials, n))
    diff = (c_sent + noise) - c_test
    return np.sum(diff * diff, axis=1) / n - params.second_moment
