"""Independent replications on worker threads.

Runs are dispatched with ``asyncio.to_thread`` behind a semaphore; results
come back ordered by replication index regardless of completion order.
"""

import asyncio
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..utils.config import get_max_workers
from ..utils.errors import InvalidArgumentError
from .kde_ais import run_kde_ais
from .schemas import RunConfig, RunTrace

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("p_mis", "p_mf_mis", "r_hat")


@dataclass
class ReplicationSummary:
    seeds: List[int]
    traces: List[RunTrace]
    # estimator -> {"mean", "sd", "median"} over final rows
    final: Dict[str, Dict[str, float]] = field(default_factory=dict)
    # column -> {"n_evals", "mean", "median", "sd"} per trace row
    curves: Dict[str, Dict[str, List[float]]] = field(default_factory=dict)
    partial: bool = False

    def to_dict(self) -> dict:
        return {
            "replications": len(self.traces),
            "seeds": self.seeds,
            "partial": self.partial,
            "status": [t.status for t in self.traces],
            "final": self.final,
            "curves": self.curves,
        }


def replication_seed(base_seed: int, index: int) -> int:
    return (int(base_seed) + index) % 2 ** 64


def _nan_stats(values: np.ndarray, axis: int = 0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(values, axis=axis)
        median = np.nanmedian(values, axis=axis)
        count = np.sum(~np.isnan(values), axis=axis)
        sd = np.where(count > 1, np.nanstd(values, axis=axis, ddof=1), 0.0)
    return mean, sd, median


def summarize(traces: List[RunTrace], seeds: List[int]) -> ReplicationSummary:
    summary = ReplicationSummary(seeds=list(seeds), traces=list(traces))
    summary.partial = any(not t.completed for t in traces)

    for name in SUMMARY_COLUMNS:
        finals = np.array([t.rows[-1][name] if t.rows else np.nan for t in traces], dtype=float)
        mean, sd, median = _nan_stats(finals)
        summary.final[name] = {"mean": float(mean), "sd": float(sd), "median": float(median)}

    longest = max((len(t.rows) for t in traces), default=0)
    reference = max(traces, key=lambda t: len(t.rows)) if traces else None
    n_evals = [row["n_evals"] for row in reference.rows] if reference else []
    for name in SUMMARY_COLUMNS + ("eta",):
        grid = np.full((len(traces), longest), np.nan)
        for i, t in enumerate(traces):
            grid[i, : len(t.rows)] = t.column(name)
        mean, sd, median = _nan_stats(grid)
        summary.curves[name] = {
            "n_evals": n_evals,
            "mean": np.atleast_1d(mean).tolist(),
            "sd": np.atleast_1d(sd).tolist(),
            "median": np.atleast_1d(median).tolist(),
        }
    return summary


async def _run_all(config: RunConfig, seeds: List[int], runner: Callable, max_workers: int) -> List[RunTrace]:
    semaphore = asyncio.Semaphore(max_workers)

    async def one(index: int, seed: int) -> RunTrace:
        async with semaphore:
            logger.info("[replicate] Starting replication %d (seed %d).", index, seed)
            trace = await asyncio.to_thread(runner, config.model_copy(update={"seed": seed}))
            logger.info("[replicate] Replication %d finished: %s.", index, trace.status)
            return trace

    return await asyncio.gather(*(one(i, s) for i, s in enumerate(seeds)))


def run_replications(
    config: RunConfig,
    replications: Optional[int] = None,
    base_seed: Optional[int] = None,
    runner: Callable[[RunConfig], RunTrace] = run_kde_ais,
    max_workers: Optional[int] = None,
) -> ReplicationSummary:
    """R independent runs with seeds base_seed + i.

    Args:
        config: run configuration; its seed and replication count are the defaults.
        replications: number of runs R >= 1.
        base_seed: seed of replication 0.
        runner: ``runner(config) -> RunTrace``; KDE-AIS by default.
        max_workers: concurrent runs; ``KDE_AIS_MAX_WORKERS`` by default.

    Returns:
        Summary statistics plus every trace. ``partial`` is set when any run aborted.
    """
    count = config.replications if replications is None else replications
    if count < 1:
        raise InvalidArgumentError(f"replications must be >= 1, got {count}")
    base = config.seed if base_seed is None else base_seed
    seeds = [replication_seed(base, i) for i in range(count)]
    workers = max_workers or get_max_workers()

    traces = asyncio.run(_run_all(config, seeds, runner, workers))
    summary = summarize(traces, seeds)
    if summary.partial:
        logger.warning("[replicate] %d of %d runs aborted; summary is partial.", sum(not t.completed for t in traces), count)
    return summary
