"""Univariate marginals of the input density, backed by frozen scipy.stats distributions.

Sampling is by inverse CDF for every kind so a draw costs one uniform per
coordinate and is reproducible from the stream state alone.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Tuple

import numpy as np
from scipy import stats

from ..utils.errors import InvalidArgumentError

# Open-interval clamp for inverse-CDF sampling; ppf(0) is -inf for unbounded kinds
_U_LOW = np.finfo(float).tiny
_U_HIGH = 1.0 - np.finfo(float).epsneg


class Marginal:
    """Common behaviour; subclasses provide ``dist`` and their parameters."""

    kind: str = ""

    @property
    def dist(self):
        raise NotImplementedError

    @property
    def bounded(self) -> bool:
        lo, hi = self.support
        return math.isfinite(lo) and math.isfinite(hi)

    @property
    def support(self) -> Tuple[float, float]:
        lo, hi = self.dist.support()
        return float(lo), float(hi)

    @property
    def box(self) -> Tuple[float, float]:
        """Standardization box: the support if bounded, else mean +/- 4 sd."""
        if self.bounded:
            return self.support
        mean, sd = float(self.dist.mean()), float(self.dist.std())
        lo, hi = self.support
        return max(mean - 4.0 * sd, lo), min(mean + 4.0 * sd, hi)

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        return self.dist.logpdf(x)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return self.dist.cdf(x)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return self.dist.ppf(u)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = np.clip(rng.random(n), _U_LOW, _U_HIGH)
        return self.ppf(u)

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformMarginal(Marginal):
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidArgumentError(f"uniform marginal needs lo < hi, got [{self.lo}, {self.hi}]")

    @cached_property
    def dist(self):
        return stats.uniform(loc=self.lo, scale=self.hi - self.lo)

    def to_dict(self):
        return {"dist": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class NormalMarginal(Marginal):
    mean: float
    sd: float
    kind = "normal"

    def __post_init__(self):
        if not self.sd > 0:
            raise InvalidArgumentError(f"normal marginal needs sd > 0, got {self.sd}")

    @cached_property
    def dist(self):
        return stats.norm(loc=self.mean, scale=self.sd)

    def to_dict(self):
        return {"dist": self.kind, "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class LognormalMarginal(Marginal):
    mu_log: float
    sigma_log: float
    kind = "lognormal"

    def __post_init__(self):
        if not self.sigma_log > 0:
            raise InvalidArgumentError(f"lognormal marginal needs sigma_log > 0, got {self.sigma_log}")

    @classmethod
    def from_mean_cv(cls, mean: float, cv: float) -> "LognormalMarginal":
        """Parameters from the native-scale mean and coefficient of variation."""
        if not (mean > 0 and cv > 0):
            raise InvalidArgumentError(f"lognormal mean and cv must be positive, got {mean}, {cv}")
        sigma2 = math.log1p(cv * cv)
        return cls(mu_log=math.log(mean) - 0.5 * sigma2, sigma_log=math.sqrt(sigma2))

    @cached_property
    def dist(self):
        return stats.lognorm(s=self.sigma_log, scale=math.exp(self.mu_log))

    def to_dict(self):
        return {"dist": self.kind, "mu_log": self.mu_log, "sigma_log": self.sigma_log}


@dataclass(frozen=True)
class TruncatedNormalMarginal(Marginal):
    mean: float
    sd: float
    lo: float
    hi: float
    kind = "truncated_normal"

    def __post_init__(self):
        if not self.sd > 0:
            raise InvalidArgumentError(f"truncated normal needs sd > 0, got {self.sd}")
        if not self.lo < self.hi:
            raise InvalidArgumentError(f"truncated normal needs lo < hi, got [{self.lo}, {self.hi}]")
        a, b = self._standard_bounds
        if not stats.norm.cdf(b) - stats.norm.cdf(a) > 0:
            raise InvalidArgumentError(
                f"truncated normal has no mass on [{self.lo}, {self.hi}] (mean={self.mean}, sd={self.sd})"
            )

    @property
    def _standard_bounds(self) -> Tuple[float, float]:
        return (self.lo - self.mean) / self.sd, (self.hi - self.mean) / self.sd

    @cached_property
    def dist(self):
        a, b = self._standard_bounds
        return stats.truncnorm(a=a, b=b, loc=self.mean, scale=self.sd)

    def to_dict(self):
        return {"dist": self.kind, "mean": self.mean, "sd": self.sd, "lo": self.lo, "hi": self.hi}


def marginal_from_dict(spec: Dict[str, Any]) -> Marginal:
    """Build a marginal from its ``{"dist": ..., params...}`` declaration."""
    params = dict(spec)
    kind = params.pop("dist", None)
    try:
        if kind == "uniform":
            return UniformMarginal(**params)
        if kind == "normal":
            return NormalMarginal(**params)
        if kind == "lognormal":
            if "mean" in params or "cv" in params:
                return LognormalMarginal.from_mean_cv(**params)
            return LognormalMarginal(**params)
        if kind == "truncated_normal":
            return TruncatedNormalMarginal(**params)
    except TypeError as e:
        raise InvalidArgumentError(f"bad parameters for {kind} marginal: {e}") from e
    raise InvalidArgumentError(f"unknown marginal kind: {kind!r}")
