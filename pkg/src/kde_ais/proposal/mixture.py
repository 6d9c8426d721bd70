"""Exploration mixture q(x) = (1 - eta) * q_hat(x) + eta * p(x)."""

import math
from dataclasses import dataclass

import numpy as np

from ..inputs.density import InputDensity
from ..utils.arrays import as_points, unwrap
from ..utils.errors import InvalidArgumentError
from .kde import WeightedKde


@dataclass(frozen=True)
class MixtureProposal:
    """Mixture of a KDE branch and the input density.

    The KDE branch is restricted to the support of ``input_density`` and
    renormalized on construction, so both branches are densities on the same
    set and ``log_density`` is the density ``sample`` draws from.
    """

    kde: WeightedKde
    exploration_weight: float
    input_density: InputDensity

    def __post_init__(self):
        if not 0.0 <= self.exploration_weight <= 1.0:
            raise InvalidArgumentError(f"exploration weight must lie in [0, 1], got {self.exploration_weight}")
        if self.kde.dimension != self.input_density.dimension:
            raise InvalidArgumentError("KDE and input density have different dimensions")
        if not self.kde.truncated:
            restricted = self.kde.restricted_to(self.input_density.support_lower, self.input_density.support_upper)
            object.__setattr__(self, "kde", restricted)

    @property
    def dimension(self) -> int:
        return self.input_density.dimension

    def log_density(self, x):
        pts, single = as_points(x, self.dimension)
        eta = self.exploration_weight
        if eta == 1.0:
            return unwrap(self.input_density.log_density(pts), single)
        log_q = self.kde.log_density(pts)
        if eta == 0.0:
            return unwrap(log_q, single)
        log_p = self.input_density.log_density(pts)
        out = np.logaddexp(math.log1p(-eta) + log_q, math.log(eta) + log_p)
        return unwrap(out, single)

    def density(self, x):
        return np.exp(self.log_density(x))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return sample_mixture(self, rng, n)


def mixture_log_density(proposal: MixtureProposal, x):
    return proposal.log_density(x)


def sample_mixture(proposal: MixtureProposal, rng: np.random.Generator, batch: int, return_branches: bool = False):
    """Draw ``batch`` points: KDE branch with probability 1 - eta, else from p.

    Returns:
        The (batch, d) points, plus a boolean mask of exploration draws when
        ``return_branches`` is set.
    """
    if batch < 1:
        raise InvalidArgumentError(f"batch must be >= 1, got {batch}")
    explore = rng.random(batch) >= 1.0 - proposal.exploration_weight
    points = np.empty((batch, proposal.dimension))
    n_explore = int(explore.sum())
    if n_explore:
        points[explore] = proposal.input_density.sample(rng, n_explore)
    if n_explore < batch:
        points[~explore] = proposal.kde.sample(rng, batch - n_explore)
    if return_branches:
        return points, explore
    return points
