"""The adaptive sampling loop.

Each iteration: surrogate failure probabilities at the pilot, alpha-smoothed
KDE over the pilot, exploration mixture with the input density, one batch of
oracle calls, then online estimates over every sample acquired so far. The
same evaluations train the surrogate and feed the MIS estimators.
"""

import logging
import time
from typing import Callable, Optional

import numpy as np

from ..estimators import (
    LabeledSamples,
    MixtureDensityCache,
    ProposalHistory,
    mf_mis_estimate,
    mis_estimate,
    surrogate_error_estimate,
)
from ..inputs import InputDensity
from ..limit_states import LimitState, get_benchmark, make_limit_state
from ..proposal import MixtureProposal, build_weighted_kde, eta_schedule, sample_mixture, uniform_kde
from ..schemas import Dataset
from ..surrogate import exact_surrogate_factory, gp_factory
from ..utils.errors import DegenerateWeightsError, NumericalFaultError
from .schemas import STATUS_ABORTED, RunConfig, RunTrace, TraceRow
from .streams import RunStreams

logger = logging.getLogger(__name__)


def make_surrogate_factory(config: RunConfig, density: InputDensity) -> Callable:
    if config.surrogate == "exact":
        return exact_surrogate_factory(get_benchmark(config.benchmark).function)
    return gp_factory(config.kernel, scaler=density.scaler, n_starts=config.gp_restarts)


def _online_row(
    config: RunConfig,
    samples: LabeledSamples,
    history: ProposalHistory,
    weights: MixtureDensityCache,
    surrogate,
    density: InputDensity,
    rng: np.random.Generator,
    eta: float,
    wall_ms: float,
):
    """MIS, MF-MIS and r_hat from one shared set of log weights."""
    t = config.threshold
    log_w = np.asarray(density.log_density(samples.x), dtype=float) - weights.log_density()
    p_mis = r_hat = float("nan")
    mf = None
    if "mis" in config.estimators:
        p_mis = mis_estimate(samples, history, density, t, log_weights=log_w)
    if "mf_mis" in config.estimators:
        cheap = None
        if config.mf_mis_samples > 0:
            cheap_x, cheap_idx = history.sample(rng, config.mf_mis_samples)
            cheap = LabeledSamples(cheap_x, None, cheap_idx)
        mf = mf_mis_estimate(
            cheap, samples, history, surrogate, density, t, log_weights=log_w,
            weight_subsample=config.mf_mis_weight_samples, rng=rng,
        )
    if "r_hat" in config.estimators:
        r_hat = surrogate_error_estimate(samples, history, surrogate, density, t, log_weights=log_w)
    row = TraceRow(
        n_evals=len(samples),
        p_mis=p_mis,
        p_mf_mis=mf.value if mf is not None else float("nan"),
        r_hat=r_hat,
        eta=float(eta),
        wall_ms=wall_ms,
    )
    return row, (mf.raw if mf is not None else float("nan"))


def run_kde_ais(
    config: RunConfig,
    streams: Optional[RunStreams] = None,
    input_density: Optional[InputDensity] = None,
    surrogate_factory: Optional[Callable] = None,
    limit_state: Optional[LimitState] = None,
    record_timing: bool = True,
) -> RunTrace:
    """Run the adaptive sampler for ``config.iterations`` batches.

    Args:
        config: validated run configuration.
        streams: random substreams; defaults to ``RunStreams(config.seed)``.
        input_density: overrides the benchmark's input model.
        surrogate_factory: ``factory(data, rng, warm_start)``; GP or exact per config.
        limit_state: counted oracle; a fresh one per run by default.
        record_timing: when False, ``wall_ms`` is written as 0.

    Returns:
        The trace. A surrogate or weight fault ends the run early with status
        ``aborted`` and the rows acquired so far.
    """
    streams = streams or RunStreams(config.seed)
    density = input_density or get_benchmark(config.benchmark).input_density()
    oracle = limit_state or make_limit_state(config.benchmark, config.threshold)
    factory = surrogate_factory or make_surrogate_factory(config, density)
    scaler = density.scaler
    started = time.perf_counter()

    def elapsed_ms() -> float:
        return (time.perf_counter() - started) * 1e3 if record_timing else 0.0

    logger.info(
        "[driver] %s t=%g: N0=%d T=%d N_b=%d m=%d (budget %d, seed %d)",
        config.benchmark, config.threshold, config.n_seed, config.iterations,
        config.batch_size, config.pilot_size, config.budget, config.seed,
    )

    pilot_native = density.sample(streams.generator("pilot"), config.pilot_size)
    pilot_unit = scaler.to_unit(pilot_native)

    x0 = density.sample(streams.generator("seed_design"), config.n_seed)
    y0 = oracle.evaluate_batch(x0)
    data = Dataset(x0, y0)
    samples = LabeledSamples(x0, y0, np.zeros(len(y0), dtype=int))
    history = ProposalHistory(density, config.n_seed)
    weights = MixtureDensityCache(history)
    weights.extend(x0)
    trace = RunTrace(config=config, history=history, input_density=density)

    surrogate = None
    try:
        surrogate = factory(data, rng=streams.generator("gp", 0), warm_start=None)
        row, raw = _online_row(config, samples, history, weights, surrogate, density, streams.generator("mf_mis", 0), 1.0, elapsed_ms())
        trace.rows.append(row)
        trace.mf_mis_raw.append(raw)

        for n in range(1, config.iterations + 1):
            probs = surrogate.failure_probability(pilot_native, config.threshold)
            eta = eta_schedule(n, config.c, config.gamma)
            try:
                kde = build_weighted_kde(pilot_unit, probs, config.alpha, config.bandwidth, scaler)
            except DegenerateWeightsError:
                logger.warning("[driver][iter %d] All pilot failure probabilities are zero; exploring from p.", n)
                kde = uniform_kde(pilot_unit, config.alpha, config.bandwidth, scaler)
                eta = 1.0
                trace.flags.append(f"degenerate_weights:{n}")
            proposal = MixtureProposal(kde, eta, density)

            xb = sample_mixture(proposal, streams.generator("batch", n), config.batch_size)
            yb = oracle.evaluate_batch(xb)
            k = history.append(proposal, config.batch_size)
            samples = samples.extend(LabeledSamples(xb, yb, np.full(len(yb), k, dtype=int)))
            data = data.extend(xb, yb)
            weights.extend(xb)

            surrogate = factory(data, rng=streams.generator("gp", n), warm_start=surrogate)
            row, raw = _online_row(config, samples, history, weights, surrogate, density, streams.generator("mf_mis", n), eta, elapsed_ms())
            trace.rows.append(row)
            trace.mf_mis_raw.append(raw)
            logger.debug(
                "[driver][iter %d] n=%d eta=%.4f mis=%.4e mf_mis=%.4e r_hat=%.4e",
                n, row["n_evals"], eta, row["p_mis"], row["p_mf_mis"], row["r_hat"],
            )
    except NumericalFaultError as e:
        logger.error("[driver] Run aborted after %d evaluations: %s", oracle.call_count, e)
        trace.status = STATUS_ABORTED
        trace.error = str(e)

    trace.dataset = data
    trace.surrogate_summary = surrogate.summary() if surrogate is not None else {}
    trace.oracle_calls = oracle.call_count
    if trace.completed:
        logger.info(
            "[driver] Done: %d evaluations, MIS=%.4e MF-MIS=%.4e",
            trace.oracle_calls, trace.rows[-1]["p_mis"], trace.rows[-1]["p_mf_mis"],
        )
    return trace
