from .density import InputDensity, UnitScaler
from .marginals import (
    LognormalMarginal,
    Marginal,
    NormalMarginal,
    TruncatedNormalMarginal,
    UniformMarginal,
    marginal_from_dict,
)

__all__ = [
    "InputDensity",
    "UnitScaler",
    "Marginal",
    "UniformMarginal",
    "NormalMarginal",
    "LognormalMarginal",
    "TruncatedNormalMarginal",
    "marginal_from_dict",
]
