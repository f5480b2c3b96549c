"""Priors, log posterior, HMC, MAP estimation and chain diagnostics."""

from .diagnostics import diagnostics, ess, rhat
from .hmc import HMCConfig, PosteriorDraws, hmc_sample
from .model import PIModel, PosteriorTarget, exact_loglik, grad_log_posterior, log_posterior
from .optimize import MAPConfig, MAPResult, map_estimate, map_inits
from .priors import HalfNormal, Normal, Uniform, prior_from_dict, prior_to_dict

__all__ = [
    "HalfNormal",
    "Normal",
    "Uniform",
    "prior_from_dict",
    "prior_to_dict",
    "PIModel",
    "PosteriorTarget",
    "exact_loglik",
    "log_posterior",
    "grad_log_posterior",
    "HMCConfig",
    "PosteriorDraws",
    "hmc_sample",
    "MAPConfig",
    "MAPResult",
    "map_estimate",
    "map_inits",
    "diagnostics",
    "rhat",
    "ess",
]
