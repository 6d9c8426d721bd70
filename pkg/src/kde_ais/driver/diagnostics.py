"""Total-variation distance between a proposal and the optimal density, on a grid."""

import logging
from typing import List, Optional, Tuple

import numpy as np

from ..estimators.history import INPUT_DENSITY
from ..inputs import InputDensity
from ..limit_states import Benchmark, get_benchmark
from ..utils.errors import InvalidArgumentError
from .schemas import RunTrace

logger = logging.getLogger(__name__)


def _grid(density: InputDensity, resolution: int):
    if density.bounded:
        lo, hi = density.support_lower, density.support_upper
    else:
        lo = density.scaler.lower
        hi = density.scaler.lower + density.scaler.width
    axes = []
    for a, b in zip(lo, hi):
        edges = np.linspace(a, b, resolution + 1)
        axes.append(0.5 * (edges[:-1] + edges[1:]))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    cell_volume = float(np.prod((np.asarray(hi) - np.asarray(lo)) / resolution))
    return points, cell_volume


def tv_distance_check(
    proposal,
    benchmark,
    t: Optional[float] = None,
    grid_resolution: int = 200,
    input_density: Optional[InputDensity] = None,
) -> float:
    """0.5 * sum |q - q_star| * cell volume over a midpoint grid, in [0, 1].

    ``proposal`` is anything with ``log_density``; q_star = p * 1{g > t}
    normalized by the grid estimate of P_F.
    """
    bench = benchmark if isinstance(benchmark, Benchmark) else get_benchmark(benchmark)
    threshold = bench.default_threshold if t is None else t
    density = input_density or getattr(proposal, "input_density", None) or bench.input_density()
    if density.dimension > 2:
        raise InvalidArgumentError(f"TV grid check supports d <= 2, got d={density.dimension}")
    if grid_resolution < 1:
        raise InvalidArgumentError(f"grid resolution must be >= 1, got {grid_resolution}")

    points, cell_volume = _grid(density, grid_resolution)
    p = density.density(points)
    failed = np.asarray(bench.function(points)) > threshold
    p_f = float(np.sum(p[failed]) * cell_volume)
    if p_f <= 0:
        raise InvalidArgumentError("no failures on the grid; q_star is undefined")
    q_star = np.where(failed, p / p_f, 0.0)
    q = np.exp(np.asarray(proposal.log_density(points), dtype=float))
    tv = 0.5 * float(np.sum(np.abs(q - q_star))) * cell_volume
    return min(1.0, max(0.0, tv))


def tv_curve(trace: RunTrace, grid_resolution: int = 200) -> List[Tuple[int, float]]:
    """TV of the proposal behind every trace row: p for the seed row, then each mixture."""
    bench = get_benchmark(trace.config.benchmark)
    density = trace.input_density
    curve = []
    for row, entry in zip(trace.rows, trace.history.entries):
        proposal = density if isinstance(entry.proposal, str) and entry.proposal == INPUT_DENSITY else entry.proposal
        tv = tv_distance_check(proposal, bench, trace.config.threshold, grid_resolution, input_density=density)
        curve.append((row["n_evals"], tv))
    logger.info("[tv] %s: TV %.4f -> %.4f over %d proposals", bench.name, curve[0][1], curve[-1][1], len(curve))
    return curve
