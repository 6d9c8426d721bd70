"""Stationary anisotropic kernels with gradients in log-hyperparameter space."""

import math
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..utils.config import DEFAULT_NUGGET
from ..utils.errors import InvalidArgumentError

SQUARED_EXPONENTIAL = "squared_exponential"
MATERN_5_2 = "matern_5_2"
KERNEL_FAMILIES = (SQUARED_EXPONENTIAL, MATERN_5_2)

_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class KernelConfig:
    family: str
    lengthscales: Tuple[float, ...]
    signal_variance: float = 1.0
    nugget: float = DEFAULT_NUGGET

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InvalidArgumentError(f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}")
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in np.ravel(self.lengthscales)))
        if not self.lengthscales or min(self.lengthscales) <= 0:
            raise InvalidArgumentError(f"lengthscales must be positive, got {self.lengthscales}")
        if not self.signal_variance > 0:
            raise InvalidArgumentError(f"signal_variance must be positive, got {self.signal_variance}")
        if self.nugget < 0:
            raise InvalidArgumentError(f"nugget must be nonnegative, got {self.nugget}")

    @classmethod
    def default(cls, family: str, dimension: int, nugget: float = DEFAULT_NUGGET) -> "KernelConfig":
        return cls(family=family, lengthscales=(0.3,) * dimension, signal_variance=1.0, nugget=nugget)

    @property
    def dimension(self) -> int:
        return len(self.lengthscales)

    @property
    def theta(self) -> np.ndarray:
        """Log lengthscales followed by log signal variance."""
        return np.log(np.append(self.lengthscales, self.signal_variance))

    def with_theta(self, theta: np.ndarray) -> "KernelConfig":
        theta = np.asarray(theta, dtype=float)
        return replace(self, lengthscales=tuple(np.exp(theta[:-1])), signal_variance=float(np.exp(theta[-1])))

    def with_nugget(self, nugget: float) -> "KernelConfig":
        return replace(self, nugget=float(nugget))


def _profile(family: str, r2: np.ndarray) -> np.ndarray:
    if family == SQUARED_EXPONENTIAL:
        return np.exp(-0.5 * r2)
    r = np.sqrt(r2)
    return (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)


def kernel_matrix(kernel: KernelConfig, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-covariance k(a_i, b_j), nugget excluded."""
    scale = np.asarray(kernel.lengthscales)
    r2 = cdist(a / scale, b / scale, "sqeuclidean")
    return kernel.signal_variance * _profile(kernel.family, r2)


def kernel_with_gradients(kernel: KernelConfig, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Gram matrix on ``x`` (nugget excluded) and its derivatives w.r.t. ``kernel.theta``."""
    scale = np.asarray(kernel.lengthscales)
    diffs2 = ((x[:, np.newaxis, :] - x[np.newaxis, :, :]) / scale) ** 2
    r2 = diffs2.sum(axis=-1)
    s = kernel.signal_variance
    if kernel.family == SQUARED_EXPONENTIAL:
        k = s * np.exp(-0.5 * r2)
        factor = k
    else:
        r = np.sqrt(r2)
        decay = np.exp(-_SQRT5 * r)
        k = s * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r2) * decay
        factor = s * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * decay
    grads = [factor * diffs2[:, :, i] for i in range(x.shape[1])]
    grads.append(k)
    return k, grads
