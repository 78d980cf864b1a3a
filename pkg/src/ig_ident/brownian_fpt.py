"""Brownian motion with drift and its first passage through an absorbing wall.

A molecule released at x = 0 moves with drift ``v`` and volatility ``sigma``
until it first reaches the receiver at distance ``d``. The first-passage time
is IG(d/v, d^2/sigma^2); the simulator here exists to check that numerically.

Paths are advanced by Euler-Maruyama. With ``bridge_correction`` a step that
ends below ``d`` still counts as a hit with the Brownian-bridge crossing
probability ``exp(-2 (d - x_k)(d - x_{k+1}) / (sigma^2 dt))``. A hit in step
``k -> k+1`` is recorded at time ``(k+1) dt``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, RunawayPathError
from .ig_distribution import IGParams, ig_cdf
from .stats import ks_statistic

# Paths sharing one generator, and steps drawn per generator call.
PATH_GROUP = 8
STEP_CHUNK = 256
# The runaway cap is this many multiples of the expected step count mu/dt.
SAFETY_FACTOR = 1_000_000


@dataclass(frozen=True)
class FluidParams:
    """Drift ``v`` (length/time), volatility ``sigma`` (length/sqrt(time)),
    distance ``d`` (length).

    ``diffusion`` is display metadata only; dynamics never read it.
    """

    v: float
    sigma: float
    d: float
    diffusion: float | None = None

    def __post_init__(self) -> None:
        for name in ("v", "sigma", "d"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_sigma2(cls, v: float, sigma2: float, d: float) -> "FluidParams":
        if not sigma2 > 0:
            raise DomainError(f"sigma2 must be > 0, got {sigma2!r}")
        return cls(v=v, sigma=math.sqrt(sigma2), d=d)


@dataclass
class PathSample:
    dt: float
    positions: np.ndarray
    absorbed: bool
    hit_time: float | None = None

    def write_trace(self, path: str | Path) -> None:
        """Write ``step, t, x`` rows for this path."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "t", "x"])
            for k, x in enumerate(self.positions):
                writer.writerow([k, f"{k * self.dt:.17g}", f"{x:.17g}"])


@dataclass
class FPTReport:
    n_samples: int
    ks_distance: float
    sample_mean: float
    sample_variance: float
    mean: float
    variance: float
    degenerate: bool
    samples: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def as_row(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "ks_distance": self.ks_distance,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "mean": self.mean,
            "variance": self.variance,
            "degenerate": int(self.degenerate),
        }


def ig_params_from_fluid(fluid: FluidParams) -> IGParams:
    """mu = d/v, lam = d^2/sigma^2."""
    return IGParams(mu=fluid.d / fluid.v, lam=fluid.d**2 / fluid.sigma**2)


def position_pdf(fluid: FluidParams, x, t: float):
    """Gaussian density of the free (unabsorbed) particle position at time ``t``."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")
    var = fluid.sigma**2 * t
    x = np.asarray(x, dtype=float)
    out = np.exp(-((x - fluid.v * t) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    return out if out.ndim else float(out)


def _check_dt(dt: float) -> float:
    dt = float(dt)
    if not math.isfinite(dt) or dt <= 0.0:
        raise DomainError(f"dt must be finite and > 0, got {dt!r}")
    return dt


def simulate_path(
    fluid: FluidParams, dt: float, t_max: float, rng: np.random.Generator
) -> PathSample:
    """Simulate one Euler path, stopping at the first grid point with x >= d or at ``t_max``."""
    dt = _check_dt(dt)
    if not t_max >= dt:
        raise DomainError("t_max must be >= dt")
    n_steps = int(math.floor(t_max / dt + 1e-9))
    increments = fluid.v * dt + fluid.sigma * math.sqrt(dt) * rng.standard_normal(n_steps)
    positions = np.concatenate(([0.0], np.cumsum(increments)))
    hits = np.flatnonzero(positions[1:] >= fluid.d)
    if hits.size:
        k = int(hits[0]) + 1
        return PathSample(dt=dt, positions=positions[: k + 1], absorbed=True, hit_time=k * dt)
    return PathSample(dt=dt, positions=positions, absorbed=False)


def sample_first_passage(
    fluid: FluidParams,
    n_samples: int,
    dt: float,
    rng: np.random.Generator,
    bridge_correction: bool = True,
) -> np.ndarray:
    """Vectorised first-passage times for ``n_samples`` independent paths.

    Paths are split into fixed groups of ``PATH_GROUP`` rows, each with its own
    generator, and advanced in chunks of ``STEP_CHUNK`` steps. A group keeps
    drawing full chunks while any of its paths is alive, so every path sees the
    same increments and bridge uniforms regardless of when other paths stop.
    Runs with and without ``bridge_correction`` are therefore coupled pathwise
    and corrected hit times are never later.

    Raises
    ------
    RunawayPathError
        If some path survives ``SAFETY_FACTOR * mu / dt`` steps.
    """
    dt = _check_dt(dt)
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    d, drift, sig = fluid.d, fluid.v * dt, fluid.sigma * math.sqrt(dt)
    bridge_scale = 2.0 / (fluid.sigma**2 * dt)
    max_steps = math.ceil(SAFETY_FACTOR * (fluid.d / fluid.v) / dt)

    n_groups = -(-n_samples // PATH_GROUP)
    seeds = rng.integers(0, 2**63, size=n_groups, dtype=np.uint64)
    gens = [np.random.Generator(np.random.Philox(int(s))) for s in seeds]
    hit_steps = np.zeros(n_samples, dtype=np.int64)
    alive = np.ones(n_samples, dtype=bool)
    x = np.zeros(n_samples)
    live_groups = list(range(n_groups))
    steps_done = 0
    while live_groups:
        if steps_done >= max_steps:
            raise RunawayPathError(
                f"{int(alive.sum())} path(s) still running after {steps_done} steps (dt={dt!r})"
            )
        rows = np.concatenate(
            [np.arange(g * PATH_GROUP, min(n_samples, (g + 1) * PATH_GROUP)) for g in live_groups]
        )
        g_sizes = [min(n_samples, (g + 1) * PATH_GROUP) - g * PATH_GROUP for g in live_groups]
        noise = np.vstack([gens[g].standard_normal((k, STEP_CHUNK)) for g, k in zip(live_groups, g_sizes)])
        u = np.vstack([gens[g].random((k, STEP_CHUNK)) for g, k in zip(live_groups, g_sizes)])
        path = x[rows, None] + np.cumsum(drift + sig * noise, axis=1)
        crossed = path >= d
        if bridge_correction:
            prev = np.empty_like(path)
            prev[:, 0] = x[rows]
            prev[:, 1:] = path[:, :-1]
            # Crossing probabilities below e^-40 cannot beat a double uniform.
            expo = bridge_scale * (d - prev) * (d - path)
            near = expo < 40.0
            with np.errstate(over="ignore"):
                crossed[near] |= u[near] < np.exp(-expo[near])
        live = alive[rows]
        any_hit = crossed.any(axis=1) & live
        first = np.argmax(crossed, axis=1)
        hit_steps[rows[any_hit]] = steps_done + first[any_hit] + 1
        alive[rows[any_hit]] = False
        x[rows] = path[:, -1]
        live_groups = [
            g for g in live_groups
            if alive[g * PATH_GROUP : min(n_samples, (g + 1) * PATH_GROUP)].any()
        ]
        steps_done += STEP_CHUNK
    return hit_steps * dt


def simulate_first_passage(
    fluid: FluidParams,
    dt: float,
    rng: np.random.Generator,
    bridge_correction: bool = True,
) -> float:
    """Approximate first time a single path reaches ``d``."""
    return float(sample_first_passage(fluid, 1, dt, rng, bridge_correction)[0])


def default_dt(fluid: FluidParams) -> float:
    return (fluid.d / fluid.v) / 1e4


def summarize_first_passage(fluid: FluidParams, samples: np.ndarray, dt: float) -> FPTReport:
    """KS distance and moment comparison of first-passage samples against the IG law.

    The report is flagged ``degenerate`` when the theoretical spread of the
    first-passage time is below the time grid (std < dt) or the samples show
    no variance at all.
    """
    params = ig_params_from_fluid(fluid)
    samples = np.asarray(samples, dtype=float)
    var = float(np.var(samples, ddof=1)) if samples.size > 1 else 0.0
    degenerate = math.sqrt(params.variance) < dt or var == 0.0
    return FPTReport(
        n_samples=int(samples.size),
        ks_distance=ks_statistic(samples, lambda z: ig_cdf(params, z)),
        sample_mean=float(np.mean(samples)),
        sample_variance=var,
        mean=params.mean,
        variance=params.variance,
        degenerate=degenerate,
        samples=samples,
    )


def validate_fpt_distribution(
    fluid: FluidParams,
    n_samples: int,
    dt: float,
    rng: np.random.Generator,
    bridge_correction: bool = True,
) -> FPTReport:
    """Simulate ``n_samples`` first-passage times and compare them with IG(d/v, d^2/sigma^2)."""
    if n_samples < 100:
        raise DomainError(f"n_samples must be >= 100, got {n_samples}")
    samples = sample_first_passage(fluid, n_samples, dt, rng, bridge_correction)
    return summarize_first_passage(fluid, samples, dt)
