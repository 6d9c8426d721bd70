"""Run configuration and trace types."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, TypedDict, Union

from pydantic import BaseModel, ConfigDict, model_validator

from ..limit_states.registry import BENCHMARKS
from ..schemas import Dataset
from ..surrogate.kernels import SQUARED_EXPONENTIAL
from ..utils.config import (
    DEFAULT_ALPHA,
    DEFAULT_BANDWIDTH,
    DEFAULT_C,
    DEFAULT_GAMMA,
    DEFAULT_GP_STARTS,
    DEFAULT_MF_MIS_SAMPLES,
    DEFAULT_MF_MIS_WEIGHT_SAMPLES,
    DEFAULT_PILOT_SIZE,
    DEFAULT_TWO_STAGE_SPLIT,
)

ESTIMATORS = ("mis", "mf_mis", "r_hat")
TRACE_COLUMNS = ("n_evals", "p_mis", "p_mf_mis", "r_hat", "eta", "wall_ms")

STATUS_COMPLETED = "completed"
STATUS_ABORTED = "aborted"


class RunConfig(BaseModel):
    """Science parameters of one experiment.

    Unset ``threshold``, ``n_seed``, ``iterations`` and ``batch_size`` are
    filled from the benchmark registry during validation.
    """

    model_config = ConfigDict(extra="forbid")

    benchmark: str
    threshold: Optional[float] = None
    n_seed: Optional[int] = None
    iterations: Optional[int] = None
    batch_size: Optional[int] = None
    pilot_size: int = DEFAULT_PILOT_SIZE
    alpha: float = DEFAULT_ALPHA
    bandwidth: Union[Literal["normal_reference"], float] = DEFAULT_BANDWIDTH
    c: float = DEFAULT_C
    gamma: float = DEFAULT_GAMMA
    mf_mis_samples: int = DEFAULT_MF_MIS_SAMPLES
    # None evaluates q_bar at every cheap point predicted to fail
    mf_mis_weight_samples: Optional[int] = DEFAULT_MF_MIS_WEIGHT_SAMPLES
    estimators: List[Literal["mis", "mf_mis", "r_hat"]] = list(ESTIMATORS)
    seed: int = 0
    replications: int = 1
    kernel: Literal["squared_exponential", "matern_5_2"] = SQUARED_EXPONENTIAL
    gp_restarts: int = DEFAULT_GP_STARTS
    two_stage_split: float = DEFAULT_TWO_STAGE_SPLIT
    surrogate: Literal["gp", "exact"] = "gp"

    @model_validator(mode="after")
    def _fill_and_check(self) -> "RunConfig":
        bench = BENCHMARKS.get(self.benchmark)
        if bench is None:
            raise ValueError(f"unknown benchmark {self.benchmark!r}; expected one of {sorted(BENCHMARKS)}")
        n_seed, iterations, batch_size = bench.settings
        if self.threshold is None:
            self.threshold = bench.default_threshold
        if self.n_seed is None:
            self.n_seed = n_seed
        if self.iterations is None:
            self.iterations = iterations
        if self.batch_size is None:
            self.batch_size = batch_size

        checks = [
            (math.isfinite(self.threshold), "threshold must be finite"),
            (self.n_seed >= 2, "n_seed must be >= 2"),
            (self.iterations >= 1, "iterations must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (0 < self.alpha <= 1, "0 < alpha <= 1"),
            (0 < self.gamma < 1, "0 < gamma < 1"),
            (self.c > 0, "c must be positive"),
            (self.pilot_size >= self.batch_size, "pilot_size must be >= batch_size"),
            (self.mf_mis_samples >= 0, "mf_mis_samples must be >= 0"),
            (self.mf_mis_weight_samples is None or self.mf_mis_weight_samples >= 1, "mf_mis_weight_samples must be >= 1"),
            (0 <= self.seed < 2 ** 64, "seed must be an unsigned 64-bit integer"),
            (self.replications >= 1, "replications must be >= 1"),
            (self.gp_restarts >= 1, "gp_restarts must be >= 1"),
            (0 < self.two_stage_split < 1, "0 < two_stage_split < 1"),
            (len(self.estimators) > 0, "at least one estimator is required"),
            (len(set(self.estimators)) == len(self.estimators), "estimators must be unique"),
            (self.bandwidth == "normal_reference" or self.bandwidth > 0, "bandwidth must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValueError(message)
        return self

    @property
    def budget(self) -> int:
        """Total oracle evaluations, N0 + T * N_b."""
        return self.n_seed + self.iterations * self.batch_size


class TraceRow(TypedDict):
    n_evals: int
    p_mis: float
    p_mf_mis: float
    r_hat: float
    eta: float
    wall_ms: float


@dataclass
class RunTrace:
    """Everything one run produced.

    ``history`` keeps every proposal used, so diagnostics can be taken at any
    iteration after the fact.
    """

    config: RunConfig
    kind: str = "kde_ais"
    rows: List[TraceRow] = field(default_factory=list)
    mf_mis_raw: List[float] = field(default_factory=list)
    dataset: Optional[Dataset] = None
    surrogate_summary: Dict[str, Any] = field(default_factory=dict)
    status: str = STATUS_COMPLETED
    error: Optional[str] = None
    flags: List[str] = field(default_factory=list)
    oracle_calls: int = 0
    history: Any = None
    input_density: Any = None

    @property
    def completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    def final_estimates(self) -> Dict[str, float]:
        if not self.rows:
            return {}
        last = self.rows[-1]
        return {"n_evals": last["n_evals"], "p_mis": last["p_mis"], "p_mf_mis": last["p_mf_mis"], "r_hat": last["r_hat"]}

    def column(self, name: str) -> List[float]:
        return [row[name] for row in self.rows]
