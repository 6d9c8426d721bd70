"""Product input density p(x) = prod_i p_i(x_i), evaluated in log space."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..utils.arrays import as_points, unwrap
from ..utils.errors import InvalidArgumentError
from .marginals import Marginal


@dataclass(frozen=True)
class UnitScaler:
    """Affine map between native coordinates and the standardization box [0, 1]^d."""

    lower: np.ndarray
    width: np.ndarray

    @classmethod
    def identity(cls, dimension: int) -> "UnitScaler":
        return cls(lower=np.zeros(dimension), width=np.ones(dimension))

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def log_jacobian(self) -> float:
        """log |d unit / d native|; subtract from unit-space log densities."""
        return float(np.sum(np.log(self.width)))

    def to_unit(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / self.width

    def from_unit(self, z: np.ndarray) -> np.ndarray:
        return self.lower + self.width * np.asarray(z, dtype=float)


class InputDensity:
    """Independent marginals, one per input dimension. Immutable after construction."""

    def __init__(self, marginals: Sequence[Marginal]):
        if not marginals:
            raise InvalidArgumentError("input density needs at least one marginal")
        self._marginals = tuple(marginals)
        boxes = np.array([m.box for m in self._marginals], dtype=float)
        supports = np.array([m.support for m in self._marginals], dtype=float)
        self._scaler = UnitScaler(lower=boxes[:, 0], width=boxes[:, 1] - boxes[:, 0])
        self._support_lower = supports[:, 0]
        self._support_upper = supports[:, 1]

    @property
    def marginals(self):
        return self._marginals

    @property
    def dimension(self) -> int:
        return len(self._marginals)

    @property
    def bounded(self) -> bool:
        return all(m.bounded for m in self._marginals)

    @property
    def support_lower(self) -> np.ndarray:
        return self._support_lower

    @property
    def support_upper(self) -> np.ndarray:
        return self._support_upper

    @property
    def scaler(self) -> UnitScaler:
        return self._scaler

    def log_density(self, x):
        """Sum of marginal log densities; -inf outside the support."""
        pts, single = as_points(x, self.dimension)
        out = np.zeros(len(pts))
        for i, m in enumerate(self._marginals):
            out += m.logpdf(pts[:, i])
        return unwrap(out, single)

    def density(self, x):
        return np.exp(self.log_density(x))

    def cdf(self, x) -> np.ndarray:
        """Per-coordinate marginal CDFs, same shape as ``x``."""
        pts, single = as_points(x, self.dimension)
        out = np.column_stack([m.cdf(pts[:, i]) for i, m in enumerate(self._marginals)])
        return out[0] if single else out

    def contains(self, x) -> np.ndarray:
        pts, _ = as_points(x, self.dimension)
        return np.isfinite(self.log_density(pts))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise InvalidArgumentError(f"sample count must be >= 1, got {n}")
        return np.column_stack([m.sample(rng, n) for m in self._marginals])

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map points of (0, 1)^d through the marginal inverse CDFs."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.column_stack([m.ppf(u[:, i]) for i, m in enumerate(self._marginals)])

    def clip_to_support(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self._support_lower, self._support_upper)

    def to_dict(self) -> List[dict]:
        return [m.to_dict() for m in self._marginals]
