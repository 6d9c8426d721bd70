from .history import INPUT_DENSITY, HistoryEntry, MixtureDensityCache, ProposalHistory, mixture_density_bar_q
from .mis import (
    MfMisEstimate,
    is_estimate,
    is_log_weights,
    mf_mis_estimate,
    mis_estimate,
    mis_log_weights,
    naive_mc,
    surrogate_error_estimate,
)
from .schemas import LabeledSamples

__all__ = [
    "INPUT_DENSITY",
    "HistoryEntry",
    "MixtureDensityCache",
    "ProposalHistory",
    "mixture_density_bar_q",
    "MfMisEstimate",
    "is_estimate",
    "is_log_weights",
    "mf_mis_estimate",
    "mis_estimate",
    "mis_log_weights",
    "naive_mc",
    "surrogate_error_estimate",
    "LabeledSamples",
]
