"""Comparators: two-stage importance sampling and dense Monte Carlo."""

import logging
import math
import time
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from ..estimators import LabeledSamples, is_estimate, is_log_weights
from ..inputs import InputDensity
from ..limit_states import Benchmark, LimitState, get_benchmark, make_limit_state
from ..proposal import MixtureProposal, build_weighted_kde
from ..schemas import Dataset
from ..utils.errors import ConfigValidationError, InvalidArgumentError
from .kde_ais import make_surrogate_factory
from .schemas import RunConfig, RunTrace, TraceRow
from .streams import RunStreams

logger = logging.getLogger(__name__)

# Keeps Latin-hypercube points off the edges of (0, 1) before the inverse CDFs
_UNIT_EPS = 1e-12

DENSE_MC_CHUNK = 1_000_000


def stage_sizes(budget: int, split: float) -> Tuple[int, int]:
    """(stage 1, stage 2) evaluation counts: floor(split * budget) and the rest."""
    n1 = int(math.floor(split * budget))
    return n1, budget - n1


def run_two_stage_is_baseline(
    config: RunConfig,
    streams: Optional[RunStreams] = None,
    input_density: Optional[InputDensity] = None,
    surrogate_factory: Optional[Callable] = None,
    limit_state: Optional[LimitState] = None,
    record_timing: bool = True,
) -> RunTrace:
    """Fit a surrogate on a space-filling design, then spend the rest on one IS proposal.

    Stage-1 evaluations train the surrogate only; the estimate uses stage-2
    samples alone. The ``p_mis`` column carries the running IS estimate, one
    row per ``batch_size`` stage-2 evaluations.
    """
    streams = streams or RunStreams(config.seed)
    density = input_density or get_benchmark(config.benchmark).input_density()
    oracle = limit_state or make_limit_state(config.benchmark, config.threshold)
    factory = surrogate_factory or make_surrogate_factory(config, density)
    t = config.threshold
    started = time.perf_counter()

    n1, n2 = stage_sizes(config.budget, config.two_stage_split)
    if n1 < 2 or n2 < 1:
        raise ConfigValidationError(
            f"two-stage split {config.two_stage_split} leaves stage sizes ({n1}, {n2}) for budget {config.budget}"
        )
    trace = RunTrace(config=config, kind="two_stage", input_density=density)

    design = qmc.LatinHypercube(d=density.dimension, seed=streams.generator("seed_design"))
    u = np.clip(design.random(n1), _UNIT_EPS, 1.0 - _UNIT_EPS)
    x1 = density.from_uniform(u)
    y1 = oracle.evaluate_batch(x1)
    surrogate = factory(Dataset(x1, y1), rng=streams.generator("gp", 0), warm_start=None)

    pilot_native = density.sample(streams.generator("pilot"), config.pilot_size)
    predicted = (np.asarray(surrogate.predict_mean(pilot_native)) > t).astype(float)
    eta = min(1.0, config.c)
    if predicted.any():
        kde = build_weighted_kde(density.scaler.to_unit(pilot_native), predicted, config.alpha, config.bandwidth, density.scaler)
        proposal = MixtureProposal(kde, eta, density)
    else:
        logger.warning("[baseline] No predicted failures at the pilot after stage 1; stage 2 samples from p.")
        trace.flags.append("no_predicted_failures")
        proposal, eta = density, 1.0

    x2 = proposal.sample(streams.generator("stage_two"), n2)
    y2 = oracle.evaluate_batch(x2)
    log_w = is_log_weights(x2, proposal, density)
    stage_two = LabeledSamples(x2, y2)

    checkpoints = list(range(config.batch_size, n2 + 1, config.batch_size))
    if not checkpoints or checkpoints[-1] != n2:
        checkpoints.append(n2)
    for k in checkpoints:
        head = LabeledSamples(stage_two.x[:k], stage_two.y[:k])
        estimate = is_estimate(head, proposal, density, t, log_weights=log_w[:k])
        trace.rows.append(TraceRow(
            n_evals=n1 + k,
            p_mis=estimate,
            p_mf_mis=float("nan"),
            r_hat=float("nan"),
            eta=eta,
            wall_ms=(time.perf_counter() - started) * 1e3 if record_timing else 0.0,
        ))
        trace.mf_mis_raw.append(float("nan"))

    trace.dataset = Dataset(np.vstack([x1, x2]), np.concatenate([y1, y2]))
    trace.surrogate_summary = surrogate.summary()
    trace.oracle_calls = oracle.call_count
    logger.info("[baseline] Two-stage IS: %d + %d evaluations, estimate %.4e", n1, n2, trace.rows[-1]["p_mis"])
    return trace


def dense_mc_ground_truth(
    benchmark,
    t: Optional[float] = None,
    n: int = 500_000,
    repeats: int = 100,
    streams: Optional[RunStreams] = None,
    input_density: Optional[InputDensity] = None,
) -> Tuple[float, float]:
    """Naive MC repeated ``repeats`` times; returns (mean, standard error).

    Calls the raw benchmark function, so nothing is counted against a run
    budget. With one repeat the binomial standard error is reported.
    """
    bench = benchmark if isinstance(benchmark, Benchmark) else get_benchmark(benchmark)
    if n < 1 or repeats < 1:
        raise InvalidArgumentError(f"dense MC needs n >= 1 and repeats >= 1, got n={n}, repeats={repeats}")
    threshold = bench.default_threshold if t is None else t
    density = input_density or bench.input_density()
    streams = streams or RunStreams(0)

    estimates = np.empty(repeats)
    for r in range(repeats):
        rng = streams.generator("truth", r)
        failures = 0
        for start in range(0, n, DENSE_MC_CHUNK):
            size = min(DENSE_MC_CHUNK, n - start)
            y = bench.function(density.sample(rng, size))
            failures += int(np.count_nonzero(np.asarray(y) > threshold))
        estimates[r] = failures / n
        logger.debug("[truth] %s repeat %d: %.6e", bench.name, r, estimates[r])

    mean = float(np.mean(estimates))
    if repeats > 1:
        stderr = float(np.std(estimates, ddof=1) / math.sqrt(repeats))
    else:
        stderr = math.sqrt(mean * (1.0 - mean) / n)
    logger.info("[truth] %s t=%g: P_F = %.6e +/- %.2e (%d x %d)", bench.name, threshold, mean, stderr, repeats, n)
    return mean, stderr
