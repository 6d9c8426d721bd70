from .config import ExperimentFile, parse_config, serialize_config, validate_config, with_overrides
from .trace_io import read_trace, write_dataset, write_replications, write_summary, write_trace

__all__ = [
    "ExperimentFile",
    "parse_config",
    "serialize_config",
    "validate_config",
    "with_overrides",
    "read_trace",
    "write_dataset",
    "write_replications",
    "write_summary",
    "write_trace",
]
