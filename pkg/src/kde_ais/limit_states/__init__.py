from .benchmarks import cantilever, cantilever_deflection, four_branch, herbie, quadrant, shaft, shaft_response
from .oracle import LimitState
from .registry import (
    BENCHMARKS,
    SHAFT_NOMINAL_DIAMETER,
    Benchmark,
    cantilever_inputs,
    get_benchmark,
    make_limit_state,
    shaft_inputs,
)

__all__ = [
    "cantilever",
    "cantilever_deflection",
    "four_branch",
    "herbie",
    "quadrant",
    "shaft",
    "shaft_response",
    "LimitState",
    "BENCHMARKS",
    "SHAFT_NOMINAL_DIAMETER",
    "Benchmark",
    "cantilever_inputs",
    "get_benchmark",
    "make_limit_state",
    "shaft_inputs",
]
