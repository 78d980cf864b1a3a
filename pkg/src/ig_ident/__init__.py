"""Identification over the additive inverse Gaussian molecular timing channel."""

from .brownian_fpt import FluidParams, ig_params_from_fluid, validate_fpt_distribution
from .codebook import Codebook, build_greedy_packing, count_bounds, scaling_quantities
from .codec import DecodingRule, decoding_measure, encode, identify, transmit
from .error_analysis import (
    chebyshev_bounds,
    estimate_type1,
    estimate_type2,
    lemma3_bound_check,
    log_likelihood_ratio,
    regularity_check,
    separation_check,
)
from .errors import (
    DomainError,
    IGIdentError,
    InvalidInputError,
    PackingInfeasibleError,
    PreconditionError,
    RunawayPathError,
)
from .ig_distribution import IGParams, ig_cdf, ig_mgf, ig_moments, ig_pdf, ig_sample, levy_pdf

__version__ = "0.1.0"

__all__ = [
    "Codebook", "DecodingRule", "DomainError", "FluidParams", "IGIdentError", "IGParams",
    "InvalidInputError", "PackingInfeasibleError", "PreconditionError", "RunawayPathError",
    "build_greedy_packing", "chebyshev_bounds", "count_bounds", "decoding_measure", "encode",
    "estimate_type1", "estimate_type2", "identify", "ig_cdf", "ig_mgf", "ig_moments",
    "ig_params_from_fluid", "ig_pdf", "ig_sample", "lemma3_bound_check", "levy_pdf",
    "log_likelihood_ratio", "regularity_check", "scaling_quantities", "separation_check",
    "transmit", "validate_fpt_distribution",
]
