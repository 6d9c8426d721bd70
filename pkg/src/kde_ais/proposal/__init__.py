from .kde import (
    NORMAL_REFERENCE,
    NormalReferenceBandwidth,
    WeightedKde,
    box_log_mass,
    box_mass,
    build_weighted_kde,
    kde_log_density,
    log_kernel_sum,
    normal_reference_bandwidth,
    normal_reference_factor,
    uniform_kde,
)
from .mixture import MixtureProposal, mixture_log_density, sample_mixture
from .schedules import eta_schedule

__all__ = [
    "NORMAL_REFERENCE",
    "NormalReferenceBandwidth",
    "WeightedKde",
    "box_log_mass",
    "box_mass",
    "build_weighted_kde",
    "kde_log_density",
    "log_kernel_sum",
    "normal_reference_bandwidth",
    "normal_reference_factor",
    "uniform_kde",
    "MixtureProposal",
    "mixture_log_density",
    "sample_mixture",
    "eta_schedule",
]
