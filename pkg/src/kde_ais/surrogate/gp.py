"""Exact Gaussian-process regression over oracle evaluations.

Inputs are mapped to the unit cube (domain bounds, or mean +/- 4 sd for
unbounded marginals) and outputs are centred and scaled to unit variance
before any kernel work; predictions are returned in native units.

Hyperparameters (log lengthscales, log signal variance) maximize the log
marginal likelihood by multi-start L-BFGS-B with analytic gradients.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, optimize, stats

from ..inputs.density import UnitScaler
from ..schemas import Dataset
from ..utils.arrays import as_points, chunk_rows
from ..utils.config import (
    DEFAULT_GP_STARTS,
    DEFAULT_NUGGET,
    KERNEL_CHUNK_ENTRIES,
    MAX_NUGGET,
    SIGMA_FLOOR,
)
from ..utils.errors import GPFittingError, InvalidArgumentError
from .kernels import SQUARED_EXPONENTIAL, KernelConfig, kernel_matrix, kernel_with_gradients

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class FitOptions:
    n_starts: int = DEFAULT_GP_STARTS
    nugget: float = DEFAULT_NUGGET
    max_nugget: float = MAX_NUGGET
    lengthscale_bounds: Tuple[float, float] = (1e-3, 1e2)
    variance_bounds: Tuple[float, float] = (1e-3, 1e3)
    # Used as the first start, or as the fixed hyperparameters when optimize is False
    warm_start: Optional[KernelConfig] = None
    optimize: bool = True
    standardize: bool = True
    # Input box; defaults to the data range when standardizing
    scaler: Optional[UnitScaler] = None
    rng: Optional[np.random.Generator] = None
    max_iter: int = 200


@dataclass(frozen=True)
class GPPosterior:
    training_inputs: np.ndarray
    training_outputs: np.ndarray
    kernel: KernelConfig
    factor: np.ndarray
    alpha: np.ndarray
    scaler: UnitScaler
    y_mean: float
    y_scale: float
    log_marginal_likelihood: float
    constant_fallback: bool = False
    start_log_likelihoods: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def dimension(self) -> int:
        return self.training_inputs.shape[1]

    @property
    def n(self) -> int:
        return len(self.training_outputs)

    @property
    def prior_mean(self) -> float:
        return self.y_mean

    @property
    def prior_variance(self) -> float:
        return self.y_scale ** 2 * self.kernel.signal_variance

    def predict(self, x, standardized: bool = False):
        """Posterior mean and variance; variance clamped at 0."""
        pts, single = as_points(x, self.dimension)
        z = self.scaler.to_unit(pts)
        mean = np.empty(len(z))
        var = np.empty(len(z))
        for rows in chunk_rows(len(z), self.n, KERNEL_CHUNK_ENTRIES):
            ks = kernel_matrix(self.kernel, z[rows], self.training_inputs)
            mean[rows] = ks @ self.alpha
            v = linalg.solve_triangular(self.factor, ks.T, lower=True, check_finite=False)
            var[rows] = self.kernel.signal_variance - np.einsum("ij,ij->j", v, v)
        np.maximum(var, 0.0, out=var)
        if not standardized:
            mean = self.y_mean + self.y_scale * mean
            var = self.y_scale ** 2 * var
        if single:
            return float(mean[0]), float(var[0])
        return mean, var

    def predict_mean(self, x):
        """Posterior mean only; skips the triangular solve behind the variance."""
        pts, single = as_points(x, self.dimension)
        z = self.scaler.to_unit(pts)
        mean = np.empty(len(z))
        for rows in chunk_rows(len(z), self.n, KERNEL_CHUNK_ENTRIES):
            mean[rows] = kernel_matrix(self.kernel, z[rows], self.training_inputs) @ self.alpha
        mean = self.y_mean + self.y_scale * mean
        return float(mean[0]) if single else mean

    def failure_probability(self, x, t: float):
        mean, var = self.predict(x)
        probs = failure_probability_from_moments(
            np.atleast_1d(mean), np.sqrt(np.atleast_1d(var)), t, sigma_floor=SIGMA_FLOOR * self.y_scale
        )
        return float(probs[0]) if np.ndim(mean) == 0 else probs

    def summary(self) -> dict:
        return {
            "kind": "gp",
            "n": self.n,
            "family": self.kernel.family,
            "lengthscales": list(self.kernel.lengthscales),
            "signal_variance": self.kernel.signal_variance,
            "nugget": self.kernel.nugget,
            "log_marginal_likelihood": self.log_marginal_likelihood,
            "constant_fallback": self.constant_fallback,
        }


def failure_probability_from_moments(mean, sd, t: float, sigma_floor: float = SIGMA_FLOOR) -> np.ndarray:
    """1 - Phi((t - mean) / sd), or the indicator 1{mean > t} where sd <= sigma_floor."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    degenerate = sd <= sigma_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (t - mean) / np.where(degenerate, 1.0, sd)
    return np.where(degenerate, (mean > t).astype(float), stats.norm.sf(z))


def posterior(gp: GPPosterior, x):
    """Posterior mean and variance at ``x`` in native units."""
    return gp.predict(x)


def soft_failure_prob(gp, x, t: float):
    """Surrogate probability that the response at ``x`` exceeds ``t``."""
    return gp.failure_probability(x, t)


# ── Fitting ──────────────────────────────────────────────────────────────────


def _log_marginal_likelihood(theta, base: KernelConfig, z, y, with_grad=True):
    kernel = base.with_theta(theta)
    k, grads = kernel_with_gradients(kernel, z)
    k[np.diag_indices_from(k)] += kernel.nugget
    try:
        factor = linalg.cho_factor(k, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return -np.inf, np.zeros_like(theta)
    alpha = linalg.cho_solve(factor, y, check_finite=False)
    lml = -0.5 * y @ alpha - np.sum(np.log(np.diag(factor[0]))) - 0.5 * len(y) * _LOG_2PI
    if not with_grad:
        return lml, None
    inner = np.outer(alpha, alpha) - linalg.cho_solve(factor, np.eye(len(y)), check_finite=False)
    grad = np.array([0.5 * np.sum(inner * g) for g in grads])
    return lml, grad


def _factorize(kernel: KernelConfig, z: np.ndarray, max_nugget: float) -> Tuple[KernelConfig, np.ndarray]:
    """Cholesky factor of K + nugget*I, escalating the nugget x10 until it succeeds."""
    gram = kernel_matrix(kernel, z, z)
    nugget = kernel.nugget
    while True:
        try:
            factor = linalg.cholesky(gram + nugget * np.eye(len(z)), lower=True, check_finite=False)
            if nugget != kernel.nugget:
                logger.warning("[gp] Kernel matrix needed nugget %.1e (requested %.1e).", nugget, kernel.nugget)
            return kernel.with_nugget(nugget), factor
        except linalg.LinAlgError:
            nugget = nugget * 10.0 if nugget > 0 else DEFAULT_NUGGET
            if nugget > max_nugget * (1.0 + 1e-9):
                raise GPFittingError(
                    f"kernel matrix not positive definite with nugget up to {max_nugget:.1e} (n={len(z)})"
                )


def _start_points(base: KernelConfig, options: FitOptions, bounds: np.ndarray) -> np.ndarray:
    rng = options.rng if options.rng is not None else np.random.default_rng(0)
    first = np.clip(base.theta, bounds[:, 0], bounds[:, 1])
    extra = rng.uniform(bounds[:, 0], bounds[:, 1], size=(max(0, options.n_starts - 1), len(first)))
    return np.vstack([first, extra])


def fit_gp(data: Dataset, kernel_family: str = SQUARED_EXPONENTIAL, options: Optional[FitOptions] = None) -> GPPosterior:
    """Fit a GP to ``data`` and cache the factorization for posterior queries.

    Raises:
        InvalidArgumentError: fewer than two points or non-finite inputs.
        GPFittingError: the kernel matrix stays indefinite after nugget escalation.
    """
    options = options or FitOptions()
    x, y = data.x, data.y
    if len(y) < 2:
        raise InvalidArgumentError(f"GP fitting needs at least 2 points, got {len(y)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidArgumentError("GP training data must be finite")
    d = x.shape[1]

    if not options.standardize:
        scaler = UnitScaler.identity(d)
    elif options.scaler is not None:
        scaler = options.scaler
    else:
        lo, hi = x.min(axis=0), x.max(axis=0)
        scaler = UnitScaler(lower=lo, width=np.where(hi > lo, hi - lo, 1.0))
    z = scaler.to_unit(x)

    constant = np.ptp(y) == 0
    if constant:
        y_mean, y_scale = float(y[0]), 1.0
        logger.warning("[gp] All %d outputs equal %.6g; using constant-mean fallback.", len(y), y_mean)
    elif options.standardize:
        y_mean, y_scale = float(np.mean(y)), float(np.std(y))
    else:
        y_mean, y_scale = 0.0, 1.0
    y_std = (y - y_mean) / y_scale

    base = options.warm_start or KernelConfig.default(kernel_family, d)
    base = KernelConfig(kernel_family, base.lengthscales, base.signal_variance, options.nugget)

    start_lmls: Tuple[float, ...] = ()
    if options.optimize and not constant:
        bounds = np.log(np.array([options.lengthscale_bounds] * d + [options.variance_bounds]))
        best_theta, best_lml = None, -np.inf
        start_values = []

        def objective(theta):
            lml, grad = _log_marginal_likelihood(theta, base, z, y_std)
            if not np.isfinite(lml):
                return 1e25, np.zeros_like(theta)
            return -lml, -grad

        for start in _start_points(base, options, bounds):
            start_lml, _ = _log_marginal_likelihood(start, base, z, y_std, with_grad=False)
            start_values.append(float(start_lml))
            if start_lml > best_lml:
                best_theta, best_lml = start, start_lml
            result = optimize.minimize(
                objective, start, jac=True, method="L-BFGS-B", bounds=bounds,
                options={"maxiter": options.max_iter},
            )
            result_lml, _ = _log_marginal_likelihood(result.x, base, z, y_std, with_grad=False)
            if result_lml > best_lml:
                best_theta, best_lml = result.x, result_lml
        start_lmls = tuple(start_values)
        if best_theta is not None:
            base = base.with_theta(best_theta)
        else:
            logger.warning("[gp] No start gave a finite likelihood; escalating nugget at the first start.")

    kernel, factor = _factorize(base, z, options.max_nugget)
    alpha = linalg.cho_solve((factor, True), y_std, check_finite=False)
    lml = float(-0.5 * y_std @ alpha - np.sum(np.log(np.diag(factor))) - 0.5 * len(y) * _LOG_2PI)
    logger.debug("[gp] Fitted n=%d lengthscales=%s s2=%.3g lml=%.4f", len(y), kernel.lengthscales, kernel.signal_variance, lml)

    return GPPosterior(
        training_inputs=z,
        training_outputs=y_std,
        kernel=kernel,
        factor=factor,
        alpha=alpha,
        scaler=scaler,
        y_mean=y_mean,
        y_scale=y_scale,
        log_marginal_likelihood=lml,
        constant_fallback=bool(constant),
        start_log_likelihoods=start_lmls,
    )


def gp_factory(kernel_family: str = SQUARED_EXPONENTIAL, scaler: Optional[UnitScaler] = None, n_starts: int = DEFAULT_GP_STARTS):
    """Factory used by the driver: refit from scratch, warm-started at the previous optimum."""

    def factory(data: Dataset, rng: Optional[np.random.Generator] = None, warm_start=None) -> GPPosterior:
        prior = warm_start.kernel if isinstance(warm_start, GPPosterior) else None
        options = FitOptions(n_starts=n_starts, scaler=scaler, rng=rng, warm_start=prior)
        return fit_gp(data, kernel_family, options)

    return factory
