"""Weighted Gaussian KDE over pilot points, in standardized coordinates.

The bandwidth is a scalar applied in the unit-cube coordinates of the input
density, so one value works across problems with very different native
scales. Densities are reported in native units (log-Jacobian applied).

On a bounded support the KDE is restricted to the support box and divided by
its in-box mass, which has a closed form for a Gaussian kernel. Sampling
redraws out-of-box points, so draws follow the restricted density.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist
from scipy.special import log_ndtr, logsumexp

from ..inputs.density import UnitScaler
from ..utils.arrays import as_points, chunk_rows, unwrap
from ..utils.config import DEFAULT_BANDWIDTH, KERNEL_CHUNK_ENTRIES, MAX_REDRAWS, WEIGHT_FLOOR
from ..utils.errors import DegenerateWeightsError, InvalidArgumentError

logger = logging.getLogger(__name__)

NORMAL_REFERENCE = "normal_reference"

Bandwidth = Union[float, str]

# (lower, upper) corners of a box in unit coordinates; entries may be infinite
Box = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class NormalReferenceBandwidth:
    matrix: np.ndarray
    scalar: float


@dataclass(frozen=True)
class WeightedKde:
    pilot_points: np.ndarray
    raw_weights: np.ndarray
    normalized_weights: np.ndarray
    bandwidth: float
    active_indices: np.ndarray
    alpha: float
    scaler: UnitScaler
    # Restriction box in unit coordinates and log of the kernel mass inside it
    support: Optional[Box] = None
    log_mass: float = 0.0

    @property
    def dimension(self) -> int:
        return self.pilot_points.shape[1]

    @property
    def size(self) -> int:
        return len(self.pilot_points)

    @property
    def active_weights(self) -> np.ndarray:
        return self.normalized_weights[self.active_indices]

    @property
    def truncated(self) -> bool:
        return self.support is not None

    def restricted_to(self, lower, upper) -> "WeightedKde":
        """The KDE restricted to the native box [lower, upper] and renormalized.

        Infinite bounds are allowed; a box that is unbounded in every
        direction returns the KDE unchanged.

        Raises:
            DegenerateWeightsError: no kernel mass falls inside the box.
        """
        lo = self.scaler.to_unit(np.asarray(lower, dtype=float).reshape(-1))
        hi = self.scaler.to_unit(np.asarray(upper, dtype=float).reshape(-1))
        if np.all(np.isneginf(lo)) and np.all(np.isposinf(hi)):
            return self
        centers = self.pilot_points[self.active_indices]
        log_mass = box_log_mass(centers, np.log(self.active_weights), self.bandwidth, lo, hi)
        if not np.isfinite(log_mass):
            raise DegenerateWeightsError("KDE has no mass inside the input support")
        logger.debug("[proposal] KDE mass inside the support: %.4f", math.exp(log_mass))
        return dataclasses.replace(self, support=(lo, hi), log_mass=float(log_mass))

    def _inside(self, z: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        return np.all((z >= lo) & (z <= hi), axis=1)

    def log_density(self, x):
        pts, single = as_points(x, self.dimension)
        z = self.scaler.to_unit(pts)
        out = log_kernel_sum(
            z,
            self.pilot_points[self.active_indices],
            np.log(self.active_weights),
            self.bandwidth,
        )
        if self.truncated:
            out = np.where(self._inside(z), out - self.log_mass, -np.inf)
        return unwrap(out - self.scaler.log_jacobian, single)

    def _draw_unit(self, rng: np.random.Generator, n: int) -> np.ndarray:
        weights = self.active_weights
        picks = rng.choice(self.active_indices, size=n, p=weights / weights.sum())
        noise = rng.standard_normal((n, self.dimension))
        return self.pilot_points[picks] + self.bandwidth * noise

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Component j with probability w_j, plus h * N(0, I); returned in native units.

        A restricted KDE redraws points outside its box, up to ``MAX_REDRAWS``
        rounds; anything still outside is clamped to the box.
        """
        z = self._draw_unit(rng, n)
        if self.truncated:
            outside = ~self._inside(z)
            rounds = 0
            while outside.any() and rounds < MAX_REDRAWS:
                z[outside] = self._draw_unit(rng, int(outside.sum()))
                outside = ~self._inside(z)
                rounds += 1
            if outside.any():
                logger.warning("[proposal] Clamping %d KDE draws to the support box.", int(outside.sum()))
                z[outside] = np.clip(z[outside], *self.support)
        return self.scaler.from_unit(z)


def _log_interval_mass(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """log(Phi(b) - Phi(a)) for a <= b, using the upper tail when both are positive."""
    upper = a > 0
    lo = np.where(upper, -b, a)
    hi = np.where(upper, -a, b)
    with np.errstate(divide="ignore"):
        # log(Phi(hi) - Phi(lo)) = log Phi(hi) + log(1 - Phi(lo) / Phi(hi))
        log_hi = log_ndtr(hi)
        ratio = np.exp(log_ndtr(lo) - log_hi)
        return log_hi + np.log1p(-np.minimum(ratio, 1.0))


def box_log_mass(centers: np.ndarray, log_weights: np.ndarray, bandwidth: float, lower: np.ndarray, upper: np.ndarray) -> float:
    """log sum_j w_j prod_i [Phi((b_i - c_ji) / h) - Phi((a_i - c_ji) / h)]."""
    a = (lower[np.newaxis, :] - centers) / bandwidth
    b = (upper[np.newaxis, :] - centers) / bandwidth
    per_center = _log_interval_mass(a, b).sum(axis=1)
    return float(logsumexp(log_weights + per_center))


def box_mass(centers, weights, bandwidth: float, lower, upper) -> float:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    with np.errstate(divide="ignore"):
        log_w = np.log(np.asarray(weights, dtype=float))
    return math.exp(box_log_mass(centers, log_w, bandwidth, np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)))


def log_kernel_sum(z: np.ndarray, centers: np.ndarray, log_weights: np.ndarray, bandwidth: float) -> np.ndarray:
    """log sum_j exp(log_weights_j) * phi_h(z - centers_j) with a stable log-sum-exp."""
    d = centers.shape[1] if centers.ndim == 2 else z.shape[1]
    out = np.full(len(z), -np.inf)
    if len(centers) == 0 or len(z) == 0:
        return out
    inv_two_h2 = 0.5 / (bandwidth * bandwidth)
    for rows in chunk_rows(len(z), len(centers), KERNEL_CHUNK_ENTRIES):
        d2 = cdist(z[rows], centers, "sqeuclidean")
        out[rows] = logsumexp(log_weights[np.newaxis, :] - inv_two_h2 * d2, axis=1)
    return out - 0.5 * d * math.log(2.0 * math.pi * bandwidth * bandwidth)


def kde_log_density(kde: WeightedKde, x):
    return kde.log_density(x)


# ── Bandwidth ────────────────────────────────────────────────────────────────


def normal_reference_factor(dimension: int, n: float) -> float:
    """(4 / (d + 2))^(2 / (d + 4)) * n^(-2 / (d + 4)), the multiplier of the covariance."""
    return (4.0 / (dimension + 2)) ** (2.0 / (dimension + 4)) * n ** (-2.0 / (dimension + 4))


def normal_reference_bandwidth(samples: np.ndarray, n: Optional[float] = None, weights: Optional[np.ndarray] = None) -> NormalReferenceBandwidth:
    """Normal-reference bandwidth matrix and its scalar reduction.

    Args:
        samples: (n, d) points; a 1-D array is read as n points in one dimension.
        n: effective sample count; defaults to len(samples), or the Kish
            effective size 1 / sum(w^2) when ``weights`` are given.
        weights: optional nonnegative sample weights.

    Returns:
        The bandwidth matrix H and scalar h with h^2 = trace(H) / d.

    Raises:
        InvalidArgumentError: fewer than two samples, or a zero bandwidth
            (every sample identical).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if samples.ndim != 2:
        raise InvalidArgumentError(f"samples must be an (n, d) array, got shape {samples.shape}")
    d = samples.shape[1]
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        n_eff = 1.0 / np.sum(w ** 2) if n is None else n
    else:
        w = None
        n_eff = len(samples) if n is None else n
    if n_eff < 2 or len(samples) < 2:
        raise InvalidArgumentError(f"normal-reference bandwidth needs n >= 2, got {n_eff}")

    cov = np.atleast_2d(np.cov(samples, rowvar=False, aweights=w))
    try:
        if not np.all(np.isfinite(cov)):
            raise linalg.LinAlgError("non-finite covariance")
        linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        cov = np.diag(np.diag(cov))
    factor = normal_reference_factor(d, n_eff)
    matrix = factor * cov
    scalar = float(np.sqrt(np.trace(matrix) / d))
    if not scalar > 0:
        raise InvalidArgumentError("normal-reference bandwidth is zero: the samples do not vary")
    return NormalReferenceBandwidth(matrix=matrix, scalar=scalar)


def _resolve_bandwidth(rule: Bandwidth, pilot: np.ndarray, weights: np.ndarray) -> float:
    if rule == NORMAL_REFERENCE:
        return normal_reference_bandwidth(pilot, weights=weights).scalar
    h = float(rule)
    if not h > 0:
        raise InvalidArgumentError(f"bandwidth must be positive, got {rule!r}")
    return h


# ── Construction ─────────────────────────────────────────────────────────────


def _validate_pilot(pilot: np.ndarray, alpha: float) -> np.ndarray:
    pilot = np.asarray(pilot, dtype=float)
    if pilot.ndim == 1:
        pilot = pilot[:, np.newaxis]
    if len(pilot) == 0:
        raise InvalidArgumentError("pilot sample is empty")
    if not 0 < alpha <= 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    return pilot


def _assemble(pilot, raw, alpha, bandwidth, scaler) -> WeightedKde:
    m = len(pilot)
    weights = raw / raw.sum()
    h = _resolve_bandwidth(bandwidth, pilot, weights)
    active = np.flatnonzero(weights >= WEIGHT_FLOOR / m)
    return WeightedKde(
        pilot_points=pilot,
        raw_weights=raw,
        normalized_weights=weights,
        bandwidth=h,
        active_indices=active,
        alpha=float(alpha),
        scaler=scaler or UnitScaler.identity(pilot.shape[1]),
    )


def build_weighted_kde(pilot, probs, alpha: float, bandwidth: Bandwidth = DEFAULT_BANDWIDTH, scaler: Optional[UnitScaler] = None) -> WeightedKde:
    """KDE approximating the smoothed target q(x) proportional to p(x) * pi(x)^alpha.

    Args:
        pilot: (m, d) pilot points drawn from p, already in the coordinates of
            ``scaler`` (unit cube); the array is kept by reference.
        probs: soft failure probabilities at the pilot points.
        alpha: smoothing exponent in (0, 1].
        bandwidth: fixed scalar h, or "normal_reference".
        scaler: map between native and pilot coordinates (identity if omitted).

    Raises:
        DegenerateWeightsError: every probability is zero.
    """
    pilot = _validate_pilot(pilot, alpha)
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if len(probs) != len(pilot):
        raise InvalidArgumentError(f"got {len(probs)} probabilities for {len(pilot)} pilot points")
    if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
        raise InvalidArgumentError("pilot probabilities must lie in [0, 1]")
    raw = probs ** alpha
    if not raw.sum() > 0:
        raise DegenerateWeightsError("all pilot failure probabilities are zero")
    return _assemble(pilot, raw, alpha, bandwidth, scaler)


def uniform_kde(pilot, alpha: float, bandwidth: Bandwidth = DEFAULT_BANDWIDTH, scaler: Optional[UnitScaler] = None) -> WeightedKde:
    """Equal weights over the pilot; the pure-exploration fallback target."""
    pilot = _validate_pilot(pilot, alpha)
    return _assemble(pilot, np.ones(len(pilot)), alpha, bandwidth, scaler)
