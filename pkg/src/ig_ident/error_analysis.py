"""Type I/II error estimation and the analytic machinery behind it.

Monte Carlo estimates come with 95% Wilson intervals, which stay meaningful at
zero observed errors. The Chebyshev bounds are returned unclamped: values of
1 or more are flagged vacuous instead of being hidden.

The converse-side checks evaluate, on concrete vectors, the likelihood-ratio
decomposition ``log(f(y - c2) / f(y - c1)) = log A + log B`` and the
coordinate-separation predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .codebook import Codebook
from .codec import DecodingRule, decoding_measures_batch, encode
from .errors import DomainError, InvalidInputError, PreconditionError
from .ig_distribution import IGParams, ig_moments, ig_sample, vector_log_pdf
from .stats import wilson_interval

# Noise samples generated per Monte Carlo chunk.
_CHUNK_ELEMENTS = 1_000_000

# Tolerance of the log-ratio identity, relative to the larger log-density.
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class ErrorEstimate:
    """Empirical error probability with a 95% Wilson interval."""

    p_hat: float
    trials: int
    ci_halfwidth: float
    errors: int
    ci_center: float

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "ErrorEstimate":
        center, half = wilson_interval(errors, trials)
        return cls(errors / trials, trials, half, errors, center)

    @property
    def ci_low(self) -> float:
        # The Wilson limits are exactly 0 and 1 at the extremes; avoid rounding residue.
        if self.errors == 0:
            return 0.0
        return max(0.0, self.ci_center - self.ci_halfwidth)

    @property
    def ci_high(self) -> float:
        if self.errors == self.trials:
            return 1.0
        return min(1.0, self.ci_center + self.ci_halfwidth)


def _alpha_n(n: int, a: float, b: float) -> float:
    return a * a / n ** (1.0 + 2.0 * b)


def _chunks(trials: int, n: int):
    rows = max(1, _CHUNK_ELEMENTS // n)
    for start in range(0, trials, rows):
        yield min(rows, trials - start)


def count_rejections(c_sent, c_test, params: IGParams, rule: DecodingRule, trials: int,
                     rng: np.random.Generator) -> int:
    """Number of transmissions of ``c_sent`` that the test for ``c_test`` rejects."""
    c_sent = np.asarray(c_sent, dtype=float).ravel()
    c_test = np.asarray(c_test, dtype=float).ravel()
    if c_sent.size != c_test.size:
        raise InvalidInputError("codewords differ in length")
    rejected = 0
    for rows in _chunks(trials, c_sent.size):
        t = decoding_measures_batch(c_sent, c_test, params, rows, rng)
        rejected += int(np.count_nonzero(np.abs(t) > rule.delta_n))
    return rejected


def _check_trials(trials: int) -> None:
    if trials < 100:
        raise DomainError(f"trials must be >= 100, got {trials}")


def estimate_type1(codebook: Codebook, i: int, params: IGParams, rule: DecodingRule,
                   trials: int, rng: np.random.Generator) -> ErrorEstimate:
    """P(message ``i`` is rejected when ``i`` was sent)."""
    _check_trials(trials)
    c = encode(codebook, i)
    return ErrorEstimate.from_counts(count_rejections(c, c, params, rule, trials, rng), trials)


def estimate_type2(codebook: Codebook, i: int, j: int, params: IGParams, rule: DecodingRule,
                   trials: int, rng: np.random.Generator) -> ErrorEstimate:
    """P(message ``j`` is accepted when ``i`` was sent), ``i != j``."""
    if i == j:
        raise InvalidInputError("type II error needs distinct messages i != j")
    _check_trials(trials)
    rejected = count_rejections(encode(codebook, i), encode(codebook, j), params, rule, trials, rng)
    return ErrorEstimate.from_counts(trials - rejected, trials)


@dataclass(frozen=True)
class EventEstimates:
    """Empirical probabilities of the three events used to bound type II errors.

    ``e0``: the cross term ``|2/n sum (c_i - c_j) Z|`` exceeds ``delta_n``.
    ``e1``: ``(||Z||^2 + ||c_i - c_j||^2)/n - alpha <= 2 delta_n``.
    ``e2``: ``||Z + c_i - c_j||^2 / n - alpha <= delta_n``.
    """

    e0: ErrorEstimate
    e1: ErrorEstimate
    e2: ErrorEstimate


def estimate_events(c_i, c_j, params: IGParams, rule: DecodingRule, trials: int,
                    rng: np.random.Generator) -> EventEstimates:
    diff = np.asarray(c_i, dtype=float) - np.asarray(c_j, dtype=float)
    n = diff.size
    dist2 = float(np.sum(diff * diff))
    counts = [0, 0, 0]
    for rows in _chunks(trials, n):
        z = ig_sample(params, rng, size=(rows, n))
        beta2 = 2.0 * (z @ diff) / n
        beta1 = (np.sum(z * z, axis=1) + dist2) / n
        counts[0] += int(np.count_nonzero(np.abs(beta2) > rule.delta_n))
        counts[1] += int(np.count_nonzero(beta1 - rule.alpha <= 2.0 * rule.delta_n))
        counts[2] += int(np.count_nonzero(beta1 + beta2 - rule.alpha <= rule.delta_n))
    return EventEstimates(*(ErrorEstimate.from_counts(k, trials) for k in counts))


@dataclass(frozen=True)
class ChebyshevBounds:
    eta0: float
    zeta0: float
    zeta1: float

    @property
    def eta0_vacuous(self) -> bool:
        return self.eta0 >= 1.0

    @property
    def zeta0_vacuous(self) -> bool:
        return self.zeta0 >= 1.0

    @property
    def zeta1_vacuous(self) -> bool:
        return self.zeta1 >= 1.0

    @property
    def type2_bound(self) -> float:
        return self.zeta0 + self.zeta1

    @property
    def type2_vacuous(self) -> bool:
        return self.type2_bound >= 1.0


def chebyshev_bounds(params: IGParams, t_max: float, n: int, a: float, b: float) -> ChebyshevBounds:
    """Closed-form Chebyshev bounds on the identification errors.

    eta0 = zeta1 = 9 mu^4 (1 + mu/lam)^6 / (16 a^2 n^b)  (type I; type II event E1)
    zeta0 = 9 mu^3 t_max^2 / (a^2 lam n^b)               (type II event E0)
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    mu, lam = params.mu, params.lam
    nb = n**b
    fourth = ig_moments(params).fourth_upper_bound
    eta0 = 9.0 * fourth / (16.0 * a * a * nb)
    zeta0 = 9.0 * mu**3 * t_max**2 / (a * a * lam * nb)
    zeta1 = 9.0 * fourth / (16.0 * a * a * nb)
    return ChebyshevBounds(eta0, zeta0, zeta1)


@dataclass(frozen=True)
class RegularityReport:
    passed: bool
    threshold: float
    violations: tuple[int, ...]
    violation_rate: float


def regularity_check(z_vec, n: int, a: float, b: float) -> RegularityReport:
    """Finite-n surrogate of the noise regularity condition: every ``z_t > a n^-b``.

    ``violations`` lists 1-based coordinates that fail.
    """
    z = np.asarray(z_vec, dtype=float).ravel()
    threshold = a * n ** (-b)
    bad = np.flatnonzero(~(z > threshold))
    rate = bad.size / z.size if z.size else 0.0
    return RegularityReport(bad.size == 0, threshold, tuple(int(k) + 1 for k in bad), rate)


@dataclass(frozen=True)
class LikelihoodRatioReport:
    """Decomposition of ``log(f_Z(y - c2) / f_Z(y - c1))``.

    ``tau_bound`` and ``within_bound`` are filled in by :func:`lemma3_bound_check`
    only; the bound keeps the explicit leading terms and drops the o(1)
    corrections, whose constants are unspecified.
    """

    log_A: float
    log_B: float
    ratio: float
    log_ratio_direct: float
    tau_bound: float | None = None
    within_bound: bool | None = None
    regular: bool | None = None

    @property
    def log_ratio(self) -> float:
        return self.log_A + self.log_B


def log_likelihood_ratio(y, c1, c2, params: IGParams) -> LikelihoodRatioReport:
    """Split the log-likelihood ratio of codeword ``c2`` against ``c1`` given output ``y``.

    log A = (3/2) sum log((y - c1) / (y - c2))
    log B = -(lam / 2 mu^2) sum [(c1 - c2) - mu^2 (c1 - c2) / ((y - c1)(y - c2))]

    Both noise vectors ``y - c1`` and ``y - c2`` must be strictly positive.
    The result is cross-checked against the difference of the two joint
    log-densities.
    """
    y = np.asarray(y, dtype=float).ravel()
    c1 = np.asarray(c1, dtype=float).ravel()
    c2 = np.asarray(c2, dtype=float).ravel()
    if not (y.size == c1.size == c2.size) or y.size == 0:
        raise InvalidInputError("y, c1 and c2 must be non-empty and of equal length")
    z1, z2 = y - c1, y - c2
    for name, z in (("y - c1", z1), ("y - c2", z2)):
        bad = np.flatnonzero(~(z > 0))
        if bad.size:
            raise DomainError(f"{name} is not positive at coordinate {int(bad[0]) + 1}")
    mu, lam = params.mu, params.lam
    gap = c1 - c2
    log_a = 1.5 * math.fsum(np.log1p(-gap / z2))
    log_b = -(lam / (2.0 * mu * mu)) * math.fsum(gap - mu * mu * gap / (z1 * z2))
    lp2, lp1 = vector_log_pdf(params, z2), vector_log_pdf(params, z1)
    direct = lp2 - lp1
    total = log_a + log_b
    if abs(total - direct) > IDENTITY_RTOL * max(1.0, abs(lp1), abs(lp2)):
        raise ArithmeticError(
            f"log-ratio decomposition {total!r} disagrees with direct evaluation {direct!r}"
        )
    ratio = math.exp(total) if total < 709.0 else math.inf
    return LikelihoodRatioReport(log_a, log_b, ratio, direct)


def lemma3_bound_check(c1, c2, z_vec, params: IGParams, n: int, a: float, b: float
                       ) -> LikelihoodRatioReport:
    """Check that nearly coincident codewords have likelihood ratio close to 1.

    Premise: every ``|c1_t - c2_t| < alpha_n = a^2 / n^(1+2b)``; a violation
    raises :class:`PreconditionError` naming the coordinate. With
    ``y = c1 + z`` and ``z_min = min z``,

        tau = (3/2) n alpha_n / z_min + (lam n alpha_n / 2)(1/mu^2 + 1/z_min^2)

    and ``within_bound`` is ``|1 - ratio| <= e^tau - 1``. Noise regularity is
    reported in ``regular`` rather than enforced.
    """
    c1 = np.asarray(c1, dtype=float).ravel()
    c2 = np.asarray(c2, dtype=float).ravel()
    z = np.asarray(z_vec, dtype=float).ravel()
    alpha = _alpha_n(n, a, b)
    gap = np.abs(c1 - c2)
    bad = np.flatnonzero(~(gap < alpha))
    if bad.size:
        t = int(bad[0])
        raise PreconditionError(
            f"coordinate {t + 1}: |c1 - c2| = {gap[t]!r} is not below alpha_n = {alpha!r}"
        )
    report = log_likelihood_ratio(c1 + z, c1, c2, params)
    z_min = float(np.min(z))
    n_alpha = n * alpha
    mu, lam = params.mu, params.lam
    tau = 1.5 * n_alpha / z_min + 0.5 * lam * n_alpha * (1.0 / mu**2 + 1.0 / z_min**2)
    within = abs(1.0 - report.ratio) <= math.expm1(tau)
    return LikelihoodRatioReport(
        report.log_A,
        report.log_B,
        report.ratio,
        report.log_ratio_direct,
        tau_bound=tau,
        within_bound=within,
        regular=regularity_check(z, n, a, b).passed,
    )


@dataclass(frozen=True)
class SeparationReport:
    passed: bool
    alpha_n: float
    min_max_gap: float
    offending_pair: tuple[int, int] | None


def separation_check(codebook: Codebook, n: int, a: float, b: float) -> SeparationReport:
    """Every pair of codewords differs by at least ``alpha_n`` in some coordinate.

    ``min_max_gap`` is the smallest pairwise Chebyshev (max-coordinate)
    distance; ``offending_pair`` holds 1-based indices of the worst pair when
    the check fails.
    """
    alpha = _alpha_n(n, a, b)
    if codebook.M < 2:
        return SeparationReport(True, alpha, math.inf, None)
    gaps = pdist(codebook.codewords, metric="chebyshev")
    worst = float(gaps.min())
    passed = worst >= alpha
    pair = None
    if not passed:
        mat = squareform(gaps)
        np.fill_diagonal(mat, np.inf)
        i, j = np.unravel_index(np.argmin(mat), mat.shape)
        pair = (int(min(i, j)) + 1, int(max(i, j)) + 1)
    return SeparationReport(passed, alpha, worst, pair)
