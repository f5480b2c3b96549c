"""Bayesian calibration of linear differential-equation models with
physics-informed multi-output Gaussian-process priors."""

from . import _backend
from ._backend import set_backend
from .errors import (
    CapabilityError,
    ConfigError,
    InputError,
    NumericalError,
    OptimizationError,
    PIGPError,
    SamplingError,
)
from .gp import ModelVariant, ObservationSet, VariantKind, log_marginal, predict_f, predict_u
from .inference import (
    HalfNormal,
    HMCConfig,
    MAPConfig,
    Normal,
    PIModel,
    PosteriorDraws,
    PosteriorTarget,
    Uniform,
    diagnostics,
    exact_loglik,
    hmc_sample,
    map_estimate,
)
from .kernels import DerivOrder, Family, HyperParams, KernelSpec
from .physics import LinearOperatorSpec, PhysParams, heat_operator, wk2_operator
from .runner import predict_mixture, run_fit
from .sparse import InducingSet, SparseMethod, modular_fit, sparse_log_marginal, sparse_predict

__version__ = "0.1.0"


def backend() -> str:
    """Name of the active kernel-table backend (``"cython"`` or ``"python"``)."""
    return _backend.BACKEND


__all__ = [
    "backend",
    "set_backend",
    "PIGPError",
    "InputError",
    "CapabilityError",
    "NumericalError",
    "SamplingError",
    "OptimizationError",
    "ConfigError",
    "ObservationSet",
    "ModelVariant",
    "VariantKind",
    "log_marginal",
    "predict_u",
    "predict_f",
    "PIModel",
    "PosteriorTarget",
    "PosteriorDraws",
    "HMCConfig",
    "MAPConfig",
    "Uniform",
    "HalfNormal",
    "Normal",
    "exact_loglik",
    "hmc_sample",
    "map_estimate",
    "diagnostics",
    "Family",
    "KernelSpec",
    "HyperParams",
    "DerivOrder",
    "LinearOperatorSpec",
    "PhysParams",
    "wk2_operator",
    "heat_operator",
    "InducingSet",
    "SparseMethod",
    "sparse_log_marginal",
    "sparse_predict",
    "modular_fit",
    "run_fit",
    "predict_mixture",
]
