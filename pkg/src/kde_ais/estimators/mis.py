"""Failure-probability estimators: naive MC, IS, balance-heuristic MIS,
multifidelity MIS and the surrogate-error estimate.

Weights are formed in log space and exponentiated once per sample. Sums run
over full-length arrays with zeros where the indicator is off, so estimators
that coincide algebraically also coincide in floating point.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.errors import InvalidArgumentError, NumericalFaultError
from .history import ProposalHistory
from .schemas import LabeledSamples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MfMisEstimate:
    value: float
    raw: float
    surrogate_term: float
    correction_term: float
    n_surrogate: int


def _labels(samples) -> np.ndarray:
    if isinstance(samples, LabeledSamples):
        if samples.y is None:
            raise InvalidArgumentError("samples carry no oracle labels")
        return samples.y
    return np.asarray(samples, dtype=float).reshape(-1)


def _weighted_indicator_mean(indicator: np.ndarray, log_weights: np.ndarray, n: int) -> float:
    """(1/n) * sum_i indicator_i * exp(log_weights_i)."""
    values = np.zeros(len(indicator))
    if indicator.any():
        w = np.exp(log_weights[indicator])
        if not np.all(np.isfinite(w)):
            raise NumericalFaultError("non-finite importance weight at a failing sample")
        values[indicator] = w
    return float(np.sum(values) / n)


def naive_mc(samples, t: float) -> float:
    """Fraction of oracle values above ``t``. Accepts LabeledSamples or raw outputs."""
    y = _labels(samples)
    if len(y) == 0:
        raise InvalidArgumentError("naive MC needs at least one sample")
    return float(np.count_nonzero(y > t) / len(y))


def is_log_weights(x: np.ndarray, q, p) -> np.ndarray:
    """log p(x) - log q(x) for a single proposal q.

    Raises:
        NumericalFaultError: q vanishes at a sample.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    log_q = np.asarray(q.log_density(pts), dtype=float).reshape(-1)
    if np.any(log_q == -np.inf):
        raise NumericalFaultError("proposal density is zero at a sample (not absolutely continuous)")
    return np.asarray(p.log_density(pts), dtype=float).reshape(-1) - log_q


def is_estimate(samples: LabeledSamples, q, p, t: float, log_weights: Optional[np.ndarray] = None) -> float:
    """Single-proposal IS: (1/M) sum 1{y > t} p(x) / q(x)."""
    y = _labels(samples)
    if len(y) == 0:
        raise InvalidArgumentError("IS needs at least one sample")
    if log_weights is None:
        log_weights = is_log_weights(samples.x, q, p)
    return _weighted_indicator_mean(y > t, log_weights, len(y))


def mis_log_weights(x: np.ndarray, history: ProposalHistory, p=None) -> np.ndarray:
    """log p(x) - log q_bar(x) for each row of ``x``."""
    p = p if p is not None else history.input_density
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    return np.asarray(p.log_density(pts), dtype=float) - np.asarray(history.log_density(pts), dtype=float)


def _check_counts(samples: LabeledSamples, history: ProposalHistory) -> None:
    if len(samples) and samples.proposal_index.max() >= len(history):
        raise InvalidArgumentError("sample refers to a proposal missing from the history")
    observed = np.bincount(samples.proposal_index, minlength=len(history))
    if not np.array_equal(observed, history.counts):
        raise InvalidArgumentError(
            f"history counts {history.counts.tolist()} do not match sample counts {observed.tolist()}"
        )


def mis_estimate(samples: LabeledSamples, history: ProposalHistory, p, t: float, log_weights: Optional[np.ndarray] = None) -> float:
    """Balance-heuristic MIS: (1/N_tot) sum 1{y > t} p(x) / q_bar(x).

    Args:
        samples: every oracle-labeled sample, tagged with its history entry.
        history: the proposals and counts that produced ``samples``.
        p: input density.
        t: failure threshold.
        log_weights: precomputed ``mis_log_weights`` for ``samples.x``.

    Raises:
        InvalidArgumentError: the history counts do not match the samples.
    """
    y = _labels(samples)
    _check_counts(samples, history)
    if log_weights is None:
        log_weights = mis_log_weights(samples.x, history, p)
    return _weighted_indicator_mean(y > t, log_weights, history.total)


def mf_mis_estimate(
    surrogate_samples: Optional[LabeledSamples],
    expensive_samples: LabeledSamples,
    history: ProposalHistory,
    gp,
    p,
    t: float,
    log_weights: Optional[np.ndarray] = None,
    weight_subsample: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> MfMisEstimate:
    """Surrogate MIS term over cheap draws plus an MIS correction over oracle draws.

    The surrogate indicator is posterior-mean exceedance 1{mean(x) > t}. The
    reported value is clamped at 0; ``raw`` keeps the unclamped sum. With no
    surrogate samples this is plain MIS.

    Args:
        weight_subsample: when set and smaller than the number of cheap points
            predicted to fail, p / q_bar is evaluated on a uniform subsample
            of that size (drawn with ``rng``) and scaled by the predicted
            count. The surrogate term stays unbiased; only its variance grows.
    """
    y = _labels(expensive_samples)
    _check_counts(expensive_samples, history)
    if log_weights is None:
        log_weights = mis_log_weights(expensive_samples.x, history, p)

    if surrogate_samples is None or len(surrogate_samples) == 0:
        value = _weighted_indicator_mean(y > t, log_weights, history.total)
        return MfMisEstimate(value=value, raw=value, surrogate_term=value, correction_term=0.0, n_surrogate=0)

    cheap_x = surrogate_samples.x
    predicted = np.asarray(gp.predict_mean(cheap_x), dtype=float).reshape(-1) > t
    # q_bar is only needed where the surrogate predicts failure
    n_predicted = int(np.count_nonzero(predicted))
    if weight_subsample is not None and 0 < weight_subsample < n_predicted:
        if rng is None:
            raise InvalidArgumentError("weight subsampling needs an rng")
        chosen = rng.choice(np.flatnonzero(predicted), size=weight_subsample, replace=False)
        sub_log_w = mis_log_weights(cheap_x[chosen], history, p)
        sub_term = _weighted_indicator_mean(np.ones(len(chosen), dtype=bool), sub_log_w, len(chosen))
        surrogate_term = sub_term * n_predicted / len(cheap_x)
    else:
        cheap_log_w = np.zeros(len(cheap_x))
        if n_predicted:
            cheap_log_w[predicted] = mis_log_weights(cheap_x[predicted], history, p)
        surrogate_term = _weighted_indicator_mean(predicted, cheap_log_w, len(cheap_x))

    truth = y > t
    flagged = np.asarray(gp.predict_mean(expensive_samples.x), dtype=float).reshape(-1) > t
    w = np.exp(log_weights)
    diff = truth.astype(float) - flagged.astype(float)
    correction = float(np.sum(np.where(diff != 0, diff * w, 0.0)) / history.total)

    raw = surrogate_term + correction
    if raw < 0:
        logger.debug("[estimators] MF-MIS raw estimate %.3e clamped to 0.", raw)
    return MfMisEstimate(
        value=max(0.0, raw),
        raw=raw,
        surrogate_term=surrogate_term,
        correction_term=correction,
        n_surrogate=len(cheap_x),
    )


def surrogate_error_estimate(
    samples: LabeledSamples,
    history: ProposalHistory,
    gp,
    p,
    t: float,
    log_weights: Optional[np.ndarray] = None,
) -> float:
    """MIS estimate of the surrogate misclassification E_p|pi(X) - 1_F(X)|.

    For pi in [0, 1], |pi - 1_F| = 1_F + pi - 2 pi 1_F, so this is
    P_F + E_p[pi] - 2 E_p[pi * 1_F] with the MIS weights shared by all three
    terms. Uses existing oracle labels only; may dip slightly below zero by
    noise.
    """
    y = _labels(samples)
    _check_counts(samples, history)
    if log_weights is None:
        log_weights = mis_log_weights(samples.x, history, p)
    fail = y > t
    n = history.total
    p_f = _weighted_indicator_mean(fail, log_weights, n)
    pi = np.asarray(gp.failure_probability(samples.x, t), dtype=float).reshape(-1)
    w = np.exp(log_weights)
    e_pi = float(np.sum(pi * w) / n)
    pi_fail = np.zeros(len(pi))
    pi_fail[fail] = pi[fail] * w[fail]
    e_pi_f = float(np.sum(pi_fail) / n)
    return e_pi + (p_f - 2.0 * e_pi_f)
