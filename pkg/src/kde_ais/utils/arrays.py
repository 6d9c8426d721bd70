from typing import Tuple

import numpy as np

from .errors import InvalidArgumentError


def as_points(x, dimension: int) -> Tuple[np.ndarray, bool]:
    """Return ``x`` as an (n, d) float array and whether a single point was passed."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise InvalidArgumentError(
            f"expected points of dimension {dimension}, got array of shape {np.shape(x)}"
        )
    return arr, single


def unwrap(values: np.ndarray, single: bool):
    """Undo the batching done by ``as_points``."""
    return float(values[0]) if single else values


def chunk_rows(n_rows: int, n_cols: int, budget: int):
    """Yield row slices so that each chunk holds at most ``budget`` matrix entries."""
    step = max(1, budget // max(1, n_cols))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))
