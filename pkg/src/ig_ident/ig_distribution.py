"""Inverse Gaussian (Wald) noise law of the molecular timing channel.

The noise ``Z`` is the first arrival time of a drifted Brownian particle,
``Z ~ IG(mu, lam)`` with density

    f(z) = sqrt(lam / (2 pi)) z^(-3/2) exp(-lam (z - mu)^2 / (2 mu^2 z)),  z > 0.

All densities and likelihoods here use natural logarithms; base 2 is reserved
for rates and codebook sizes in :mod:`ig_ident.codebook`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InvalidInputError

_LOG_2PI = math.log(2.0 * math.pi)


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class IGParams:
    """Mean ``mu`` and shape ``lam`` of an inverse Gaussian law (both in seconds)."""

    mu: float
    lam: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", _check_positive("mu", self.mu))
        object.__setattr__(self, "lam", _check_positive("lambda", self.lam))

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.mu**3 / self.lam

    @property
    def second_moment(self) -> float:
        """E[Z^2] = mu^2 + mu^3/lam, the decoder's centering constant."""
        return self.mu**2 + self.variance

    @property
    def mgf_limit(self) -> float:
        """Supremum lam / (2 mu^2) of arguments where the MGF is finite."""
        return self.lam / (2.0 * self.mu**2)


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    fourth_noncentral: float
    fourth_upper_bound: float


def _as_array(z) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("evaluation points must be finite")
    return arr


def _log_pdf_positive(params: IGParams, z: np.ndarray) -> np.ndarray:
    mu, lam = params.mu, params.lam
    return (
        0.5 * (math.log(lam) - _LOG_2PI)
        - 1.5 * np.log(z)
        - lam * (z - mu) ** 2 / (2.0 * mu * mu * z)
    )


def ig_log_pdf(params: IGParams, z):
    """Natural log-density; ``-inf`` where ``z <= 0``."""
    arr = _as_array(z)
    out = np.full(arr.shape, -np.inf)
    pos = arr > 0
    out[pos] = _log_pdf_positive(params, arr[pos])
    return out if out.ndim else float(out)


def ig_pdf(params: IGParams, z):
    """Density of IG(mu, lam); exactly 0 for ``z <= 0``.

    Accepts scalars or arrays. Raises :class:`InvalidInputError` for
    non-finite ``z``.
    """
    arr = _as_array(z)
    out = np.zeros(arr.shape)
    pos = arr > 0
    out[pos] = np.exp(_log_pdf_positive(params, arr[pos]))
    return out if out.ndim else float(out)


def ig_cdf(params: IGParams, z):
    """Distribution function via the standard normal CDF.

    The second term ``exp(2 lam/mu) Phi(-...)`` is assembled in log space so
    that large shape parameters (near-deterministic noise) do not overflow.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(arr)):
        raise InvalidInputError("evaluation points must not be NaN")
    out = np.zeros(arr.shape)
    pos = arr > 0
    zp = arr[pos]
    mu, lam = params.mu, params.lam
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        root = np.sqrt(lam / zp)
        first = special.ndtr(root * (zp / mu - 1.0))
        second = np.exp(2.0 * lam / mu + special.log_ndtr(-root * (zp / mu + 1.0)))
    vals = first + np.nan_to_num(second, nan=0.0)
    vals[np.isinf(zp)] = 1.0
    out[pos] = np.clip(vals, 0.0, 1.0)
    return out if out.ndim else float(out)


def ig_sample(params: IGParams, rng: np.random.Generator, size=None):
    """Draw IG(mu, lam) variates by the Michael-Schucany-Haas method.

    Each variate consumes exactly one standard normal and one uniform draw.
    The smaller root of the transformation is evaluated as
    ``mu / (1 + w + sqrt(w^2 + 2w))`` with ``w = mu nu^2 / (2 lam)``, which
    avoids the cancellation in the textbook form for large ``nu^2``.

    Parameters
    ----------
    params : IGParams
    rng : numpy.random.Generator
    size : int or tuple of int, optional
        Output shape; ``None`` returns a Python float.
    """
    mu, lam = params.mu, params.lam
    nu = rng.standard_normal(size)
    u = rng.random(size)
    w = mu * nu * nu / (2.0 * lam)
    denom = 1.0 + w + np.sqrt(w * (w + 2.0))
    small = mu / denom
    # Accept the small root with probability mu / (mu + small) = denom / (denom + 1).
    out = np.where(u * (denom + 1.0) <= denom, small, mu * denom)
    return float(out) if size is None else out


def ig_mgf(params: IGParams, alpha: float) -> float:
    """E[exp(alpha Z)] = exp((lam/mu)(1 - sqrt(1 - 2 mu^2 alpha / lam))).

    Raises :class:`DomainError` for ``alpha >= lam / (2 mu^2)`` where the
    integral diverges.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha >= params.mgf_limit:
        raise DomainError(
            f"MGF diverges for alpha >= lam/(2 mu^2) = {params.mgf_limit!r}, got {alpha!r}"
        )
    mu, lam = params.mu, params.lam
    s = 1.0 - 2.0 * mu * mu * alpha / lam
    return math.exp((lam / mu) * (1.0 - math.sqrt(s)))


def ig_moments(params: IGParams) -> MomentSet:
    """Mean, variance, exact E[Z^4] and the bound mu^4 (1 + mu/lam)^6.

    The exact fourth moment is the polynomial
    mu^4 + 6 mu^5/lam + 15 mu^6/lam^2 + 15 mu^7/lam^3; the bound dominates it
    term by term against the binomial expansion of (1 + mu/lam)^6.
    """
    mu = params.mu
    ratio = mu / params.lam
    fourth = mu**4 * (1.0 + 6.0 * ratio + 15.0 * ratio**2 + 15.0 * ratio**3)
    bound = mu**4 * (1.0 + ratio) ** 6
    return MomentSet(
        mean=mu,
        variance=params.variance,
        fourth_noncentral=fourth,
        fourth_upper_bound=bound,
    )


def levy_pdf(d: float, sigma: float, z):
    """Zero-drift first-passage density (Levy law) for distance ``d``.

    Heavy tailed: its mean is infinite.
    """
    d = _check_positive("d", d)
    sigma = _check_positive("sigma", sigma)
    arr = _as_array(z)
    out = np.zeros(arr.shape)
    pos = arr > 0
    zp = arr[pos]
    out[pos] = d / (sigma * math.sqrt(2.0 * math.pi)) * zp**-1.5 * np.exp(
        -(d * d) / (2.0 * sigma * sigma * zp)
    )
    return out if out.ndim else float(out)


def vector_log_pdf(params: IGParams, z_vec, log_base: str = "natural") -> float:
    """Joint log-density of an i.i.d. IG noise vector.

    Returns ``-inf`` when any coordinate is ``<= 0``.
    """
    if log_base != "natural":
        raise InvalidInputError("only natural-log likelihoods are supported")
    z = _as_array(z_vec).ravel()
    if z.size == 0:
        raise InvalidInputError("noise vector must be non-empty")
    if np.any(z <= 0):
        return -math.inf
    mu, lam = params.mu, params.lam
    n = z.size
    return (
        0.5 * n * (math.log(lam) - _LOG_2PI)
        - 1.5 * math.fsum(np.log(z))
        - lam / (2.0 * mu * mu) * math.fsum((z - mu) ** 2 / z)
    )
