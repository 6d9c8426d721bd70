from ..utils.errors import ConfigValidationError, InvalidArgumentError


def eta_schedule(n: int, c: float, gamma: float) -> float:
    """Exploration weight min(1, c * n^-gamma) for iteration n >= 1."""
    if not 0.0 < gamma < 1.0:
        raise ConfigValidationError(f"gamma must satisfy 0 < gamma < 1 (sum of eta_n must diverge), got {gamma}")
    if not c > 0:
        raise ConfigValidationError(f"c must be positive, got {c}")
    if n < 1:
        raise InvalidArgumentError(f"iteration index must be >= 1, got {n}")
    return min(1.0, c * n ** (-gamma))
