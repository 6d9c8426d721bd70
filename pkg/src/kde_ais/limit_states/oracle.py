import logging
import threading
from typing import Callable, Optional, Tuple

import numpy as np

from ..utils.arrays import as_points
from ..utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Relative slack on finite domain bounds for unit-cube round trips
DOMAIN_TOLERANCE = 1e-9


class LimitState:
    """Counted oracle g with failure set {g(x) > t}.

    Each point evaluated adds one to ``call_count``; the counter is guarded by
    a lock so threads sharing an oracle keep an exact count. When a
    ``domain`` box is given, points outside it are rejected before any
    evaluation is counted.
    """

    def __init__(
        self,
        name: str,
        function: Callable,
        dimension: int,
        threshold: float,
        domain: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ):
        self.name = name
        self.function = function
        self.dimension = dimension
        self.threshold = float(threshold)
        self.domain = domain
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def _count(self, n: int) -> None:
        with self._lock:
            self._calls += n

    def _check_domain(self, pts: np.ndarray) -> None:
        if self.domain is None:
            return
        lower, upper = (np.asarray(b, dtype=float) for b in self.domain)
        width = upper - lower
        slack = DOMAIN_TOLERANCE * np.where(np.isfinite(width), width, 0.0)
        outside = np.any((pts < lower - slack) | (pts > upper + slack), axis=1)
        if outside.any():
            first = pts[np.argmax(outside)]
            raise InvalidArgumentError(
                f"{self.name}: {int(outside.sum())} point(s) outside the input domain, e.g. {first.tolist()}"
            )

    def evaluate(self, x) -> float:
        pts, _ = as_points(x, self.dimension)
        self._check_domain(pts)
        value = float(np.asarray(self.function(pts[0]), dtype=float))
        self._count(1)
        return value

    def evaluate_batch(self, x) -> np.ndarray:
        pts, _ = as_points(x, self.dimension)
        self._check_domain(pts)
        values = np.asarray(self.function(pts), dtype=float).reshape(-1)
        self._count(len(pts))
        logger.debug("[oracle][%s] Evaluated %d points (total %d).", self.name, len(pts), self._calls)
        return values

    def is_failure(self, y):
        """Strict exceedance; g == t is safe."""
        return np.asarray(y) > self.threshold
