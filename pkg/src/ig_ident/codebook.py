"""Sphere-packing codebooks in the peak-constrained hypercube [0, t_max]^n.

Two regimes are kept apart here. Explicit codebooks are small random
sequential packings, enough to drive Monte Carlo decoding experiments. The
super-exponential codebook sizes of the capacity argument are never
materialised; :func:`count_bounds` evaluates them in the log domain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidInputError, PackingInfeasibleError

_LOG2_PI = math.log2(math.pi)
_LN2 = math.log(2.0)

# Exponent of the asymptotic density ceiling 2^(-0.599 n) for saturated packings.
DENSITY_CEILING_EXPONENT = 0.599

# Trailing window used to judge whether random sequential addition has saturated.
SATURATION_WINDOW = 10_000
SATURATION_RATE = 1e-3

# Relative slack for the closed distance test under floating rounding.
DISTANCE_RTOL = 1e-12


@dataclass(frozen=True)
class ScalingQuantities:
    n: int
    a: float
    b: float
    epsilon_n: float
    r0: float
    delta_n: float
    alpha_n: float


def _check_ab(a: float, b: float) -> None:
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"a must be > 0, got {a!r}")
    if not (0.0 < b < 1.0):
        raise DomainError(f"b must lie in the open interval (0, 1), got {b!r}")


def scaling_quantities(n: int, a: float, b: float) -> ScalingQuantities:
    """Blocklength-indexed constants of the achievability and converse arguments.

    ``epsilon_n = a n^(-(1-b)/2)``, ``r0 = sqrt(n epsilon_n)``,
    ``delta_n = 4 epsilon_n / 3`` and ``alpha_n = a^2 / n^(1+2b)``.
    """
    _check_ab(a, b)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    eps = a * n ** (-(1.0 - b) / 2.0)
    return ScalingQuantities(
        n=n,
        a=a,
        b=b,
        epsilon_n=eps,
        r0=math.sqrt(a) * n ** ((1.0 + b) / 4.0),
        delta_n=4.0 * a / (3.0 * n ** ((1.0 - b) / 2.0)),
        alpha_n=a * a / n ** (1.0 + 2.0 * b),
    )


def sphere_log_volume(n: int, r: float) -> float:
    """log2 of the volume of an n-ball of radius ``r`` (log-gamma, no overflow)."""
    if n < 1 or not r > 0:
        raise DomainError("need n >= 1 and r > 0")
    return 0.5 * n * _LOG2_PI - math.lgamma(0.5 * n + 1.0) / _LN2 + n * math.log2(r)


@dataclass(frozen=True)
class CountBounds:
    n: int
    t_max: float
    a: float
    b: float
    log2_M_lower: float
    log2_M_upper: float
    rate_lower: float
    rate_upper: float

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "log2_M_lower": self.log2_M_lower,
            "log2_M_upper": self.log2_M_upper,
            "rate_lower": self.rate_lower,
            "rate_upper": self.rate_upper,
        }


def count_bounds(n: int, t_max: float, a: float, b: float) -> CountBounds:
    """Finite-n codebook-size bounds and the rates they imply.

    Lower (saturated packing, density >= 2^-n, spheres of radius r0):
        log2 M >= n log2(t_max/2) - log2 Vol(B_n(r0))
    Upper (converse packing with radius alpha_n, density <= 2^(-0.599 n)):
        log2 M <= -0.599 n + n log2(t_max + 2 alpha_n) - log2 Vol(B_n(alpha_n))

    Rates are normalised by ``n log2 n``.
    """
    _check_ab(a, b)
    if n < 4:
        raise DomainError(f"count bounds need n >= 4, got {n}")
    if not t_max > 0:
        raise DomainError(f"t_max must be > 0, got {t_max!r}")
    q = scaling_quantities(n, a, b)
    lower = n * math.log2(t_max / 2.0) - sphere_log_volume(n, q.r0)
    upper = (
        -DENSITY_CEILING_EXPONENT * n
        + n * math.log2(t_max + 2.0 * q.alpha_n)
        - sphere_log_volume(n, q.alpha_n)
    )
    scale = n * math.log2(n)
    return CountBounds(n, t_max, a, b, lower, upper, lower / scale, upper / scale)


@dataclass
class Codebook:
    """Codewords (rows) in [0, t_max]^n with pairwise distance >= ``min_distance``.

    ``attempts`` and ``saturated`` describe how a greedy packing ended; both are
    ``None`` for codebooks assembled by other means.
    """

    n: int
    t_max: float
    min_distance: float
    codewords: np.ndarray
    attempts: int | None = None
    saturated: bool | None = None

    def __post_init__(self) -> None:
        self.codewords = np.atleast_2d(np.asarray(self.codewords, dtype=float))
        if self.codewords.shape[1] != self.n:
            raise InvalidInputError(
                f"codewords have length {self.codewords.shape[1]}, expected n={self.n}"
            )

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    def __len__(self) -> int:
        return self.M

    def audit(self) -> list[str]:
        """Exhaustively check the peak constraint and every pairwise distance.

        Returns a list of violations (empty when the codebook is valid).
        """
        problems = []
        cw = self.codewords
        bad = np.argwhere((cw < 0.0) | (cw > self.t_max) | ~np.isfinite(cw))
        for i, t in bad[:10]:
            problems.append(f"codeword {i + 1} coordinate {t + 1} = {cw[i, t]!r} outside [0, t_max]")
        limit = self.min_distance * (1.0 - DISTANCE_RTOL)
        for i in range(self.M - 1):
            dist = np.sqrt(np.sum((cw[i + 1 :] - cw[i]) ** 2, axis=1))
            for j in np.flatnonzero(dist < limit):
                problems.append(
                    f"codewords {i + 1} and {i + 2 + j} at distance {dist[j]!r} < {self.min_distance!r}"
                )
        return problems

    def to_csv(self, path: str | Path, comments: list[str] | None = None) -> None:
        """First non-comment row: ``n, t_max, min_distance, M``; then one codeword per row."""
        with open(path, "w", newline="") as fh:
            for line in comments or []:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow([self.n, f"{self.t_max:.17g}", f"{self.min_distance:.17g}", self.M])
            for row in self.codewords:
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Codebook":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
        if not rows:
            raise InvalidInputError(f"{path}: empty codebook file")
        n, t_max, min_distance, m = rows[0]
        codewords = np.array(rows[1:], dtype=float)
        if codewords.shape[0] != int(m):
            raise InvalidInputError(f"{path}: header says M={m}, found {codewords.shape[0]} rows")
        return cls(int(n), float(t_max), float(min_distance), codewords.reshape(int(m), int(n)))


def _min_sq_dist(cand: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Squared distance from each candidate row to its nearest point row."""
    out = np.full(cand.shape[0], np.inf)
    if points.shape[0] == 0:
        return out
    step = max(1, 4_000_000 // max(1, cand.shape[0] * cand.shape[1]))
    for s in range(0, points.shape[0], step):
        blk = points[s : s + step]
        d2 = np.sum((cand[:, None, :] - blk[None, :, :]) ** 2, axis=2)
        np.minimum(out, d2.min(axis=1), out=out)
    return out


def build_greedy_packing(
    n: int,
    t_max: float,
    min_distance: float,
    target_M: int,
    max_attempts: int,
    rng: np.random.Generator,
) -> Codebook:
    """Random sequential addition of uniform candidates in [0, t_max]^n.

    A candidate is accepted when its distance to every accepted codeword is at
    least ``min_distance`` (ties accepted). Stops after ``target_M`` codewords
    or ``max_attempts`` candidates. The result is marked ``saturated`` when the
    target was not reached and fewer than one candidate in a thousand was
    accepted over the trailing window of attempts.

    Raises
    ------
    PackingInfeasibleError
        If fewer than two codewords were accepted.
    """
    if not min_distance > 0:
        raise DomainError(f"min_distance must be > 0, got {min_distance!r}")
    if target_M < 2:
        raise DomainError(f"target_M must be >= 2, got {target_M}")
    if n < 1 or not t_max > 0:
        raise DomainError("need n >= 1 and t_max > 0")

    md2 = min_distance * min_distance
    accepted = np.empty((0, n))
    accept_at: list[int] = []
    attempts = 0
    while accepted.shape[0] < target_M and attempts < max_attempts:
        batch = max(1, min(4096, 2_000_000 // (n * max(1, accepted.shape[0])), max_attempts - attempts))
        cand = rng.uniform(0.0, t_max, size=(batch, n))
        ok = np.flatnonzero(_min_sq_dist(cand, accepted) >= md2)
        used = batch
        fresh: list[np.ndarray] = []
        for idx in ok:
            c = cand[idx]
            if all(np.sum((c - f) ** 2) >= md2 for f in fresh):
                fresh.append(c)
                accept_at.append(attempts + idx + 1)
                if accepted.shape[0] + len(fresh) >= target_M:
                    used = idx + 1
                    break
        if fresh:
            accepted = np.vstack([accepted, np.array(fresh)])
        attempts += used

    if accepted.shape[0] < 2:
        raise PackingInfeasibleError(
            f"only {accepted.shape[0]} codeword(s) placed in {attempts} attempts "
            f"(n={n}, t_max={t_max!r}, min_distance={min_distance!r})"
        )
    window = min(SATURATION_WINDOW, attempts)
    recent = sum(1 for k in accept_at if k > attempts - window)
    saturated = accepted.shape[0] < target_M and recent < SATURATION_RATE * window
    return Codebook(n, t_max, min_distance, accepted, attempts=attempts, saturated=saturated)


def codeword_pair(n: int, t_max: float, distance: float, rng: np.random.Generator) -> Codebook:
    """Two codewords at Euclidean distance exactly ``distance``.

    Every coordinate differs by ``distance / sqrt(n)`` with a random sign; the
    base point is drawn so both codewords respect the peak constraint.
    """
    step = distance / math.sqrt(n)
    if step > t_max:
        raise PackingInfeasibleError(
            f"distance {distance!r} needs per-coordinate gap {step!r} > t_max={t_max!r}"
        )
    signs = rng.choice([-1.0, 1.0], size=n)
    base = rng.uniform(0.0, t_max - step, size=n) + np.where(signs < 0, step, 0.0)
    other = base + signs * step
    cw = np.clip(np.vstack([base, other]), 0.0, t_max)
    return Codebook(n, t_max, distance, cw)


@dataclass(frozen=True)
class DensityEstimate:
    estimate: float
    std_error: float
    points: int


def estimate_packing_density(
    codebook: Codebook, r: float, mc_points: int, rng: np.random.Generator
) -> DensityEstimate:
    """Fraction of the cube within distance ``r`` of some codeword (Monte Carlo).

    The packing density uses ``r = min_distance / 2``; other radii give the
    covered fraction at that radius.
    """
    if codebook.M == 0:
        raise InvalidInputError("codebook is empty")
    if mc_points < 1:
        raise DomainError("mc_points must be >= 1")
    hits = 0
    r2 = r * r
    chunk = max(1, 2_000_000 // max(1, codebook.n * codebook.M))
    for s in range(0, mc_points, chunk):
        m = min(chunk, mc_points - s)
        pts = rng.uniform(0.0, codebook.t_max, size=(m, codebook.n))
        hits += int(np.count_nonzero(_min_sq_dist(pts, codebook.codewords) <= r2))
    p = hits / mc_points
    return DensityEstimate(p, math.sqrt(p * (1.0 - p) / mc_points), mc_points)
