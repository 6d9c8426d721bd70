from .base import Surrogate
from .exact import ExactSurrogate, exact_surrogate_factory
from .gp import (
    FitOptions,
    GPPosterior,
    failure_probability_from_moments,
    fit_gp,
    gp_factory,
    posterior,
    soft_failure_prob,
)
from .kernels import KERNEL_FAMILIES, MATERN_5_2, SQUARED_EXPONENTIAL, KernelConfig, kernel_matrix

__all__ = [
    "Surrogate",
    "ExactSurrogate",
    "exact_surrogate_factory",
    "FitOptions",
    "GPPosterior",
    "failure_probability_from_moments",
    "fit_gp",
    "gp_factory",
    "posterior",
    "soft_failure_prob",
    "KERNEL_FAMILIES",
    "MATERN_5_2",
    "SQUARED_EXPONENTIAL",
    "KernelConfig",
    "kernel_matrix",
]
