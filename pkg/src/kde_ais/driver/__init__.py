from .baselines import dense_mc_ground_truth, run_two_stage_is_baseline, stage_sizes
from .diagnostics import tv_curve, tv_distance_check
from .kde_ais import make_surrogate_factory, run_kde_ais
from .replications import ReplicationSummary, replication_seed, run_replications, summarize
from .schemas import ESTIMATORS, TRACE_COLUMNS, RunConfig, RunTrace, TraceRow
from .streams import STREAM_CODES, RunStreams

__all__ = [
    "dense_mc_ground_truth",
    "run_two_stage_is_baseline",
    "stage_sizes",
    "tv_curve",
    "tv_distance_check",
    "make_surrogate_factory",
    "run_kde_ais",
    "ReplicationSummary",
    "replication_seed",
    "run_replications",
    "summarize",
    "ESTIMATORS",
    "TRACE_COLUMNS",
    "RunConfig",
    "RunTrace",
    "TraceRow",
    "STREAM_CODES",
    "RunStreams",
]
