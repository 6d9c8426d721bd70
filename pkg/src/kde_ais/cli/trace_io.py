"""Trace, summary and dataset files.

Floats are written with ``repr`` (shortest round-trip form), so reading a
trace back gives bit-identical values. JSON documents use sorted keys and
null for non-finite numbers; nothing time-dependent is written unless timing
is recorded in the trace itself.
"""

import csv
import functools
import json
import logging
import math
import subprocess
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .. import __version__
from ..driver.replications import ReplicationSummary
from ..driver.schemas import TRACE_COLUMNS, RunTrace, TraceRow
from ..schemas import Dataset
from ..utils.errors import InvalidArgumentError, TraceIOError

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
SUMMARY_FILE = "summary.json"
DATASET_FILE = "dataset.csv"
REPLICATIONS_FILE = "replications.json"
TRUTH_FILE = "truth.json"
TV_FILE = "tv.csv"

_PROJECT_ROOT = Path(__file__).resolve().parents[3]


@functools.lru_cache(maxsize=1)
def provenance() -> str:
    """``git describe`` of the working tree, or the package version outside a checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=_PROJECT_ROOT, capture_output=True, text=True, timeout=5, check=True,
        )
        described = result.stdout.strip()
        if described:
            return f"kde-ais {__version__} ({described})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"kde-ais {__version__}"


def _format(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def sanitize(obj: Any) -> Any:
    """JSON-ready copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        raise TraceIOError(path, e) from e


def _write_rows(path: Path, header: Sequence[str], rows: List[Sequence]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format(v) for v in row])
    except OSError as e:
        raise TraceIOError(path, e) from e


def write_json(path, document: Dict[str, Any]) -> Path:
    path = Path(path)
    _write_text(path, json.dumps(sanitize(document), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def write_dataset(dataset: Dataset, path) -> Path:
    path = Path(path)
    header = [f"x{i + 1}" for i in range(dataset.dimension)] + ["y"]
    rows = [list(x) + [y] for x, y in zip(dataset.x, dataset.y)]
    _write_rows(path, header, rows)
    return path


def trace_summary(trace: RunTrace) -> Dict[str, Any]:
    config = trace.config
    return {
        "kind": trace.kind,
        "status": trace.status,
        "error": trace.error,
        "flags": list(trace.flags),
        "seed": config.seed,
        "budget": config.budget,
        "oracle_calls": trace.oracle_calls,
        "final": trace.final_estimates(),
        "p_mf_mis_raw": list(trace.mf_mis_raw),
        "surrogate": trace.surrogate_summary,
        "config": config.model_dump(exclude_none=True),
        "inputs": trace.input_density.to_dict() if trace.input_density is not None else None,
        "provenance": provenance(),
    }


def write_summary(trace: RunTrace, path) -> Path:
    return write_json(path, trace_summary(trace))


def write_trace(trace: RunTrace, out_dir) -> Dict[str, Path]:
    """Write trace.csv, summary.json and dataset.csv under ``out_dir``.

    Raises:
        InvalidArgumentError: the trace has no rows.
        TraceIOError: a file could not be written.
    """
    if not trace.rows:
        raise InvalidArgumentError("refusing to write an empty trace")
    out = Path(out_dir)
    paths = {"trace": out / TRACE_FILE, "summary": out / SUMMARY_FILE}
    _write_rows(paths["trace"], TRACE_COLUMNS, [[row[c] for c in TRACE_COLUMNS] for row in trace.rows])
    write_summary(trace, paths["summary"])
    if trace.dataset is not None:
        paths["dataset"] = write_dataset(trace.dataset, out / DATASET_FILE)
    logger.info("[io] Wrote %d trace rows to %s", len(trace.rows), out)
    return paths


def read_trace(path) -> List[TraceRow]:
    """Parse a trace CSV (or the trace.csv inside a run directory) back into rows."""
    path = Path(path)
    if path.is_dir():
        path = path / TRACE_FILE
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if tuple(header or ()) != TRACE_COLUMNS:
                raise TraceIOError(path, ValueError(f"unexpected header {header}"))
            rows = []
            for values in reader:
                record = dict(zip(TRACE_COLUMNS, values))
                rows.append(TraceRow(
                    n_evals=int(record["n_evals"]),
                    p_mis=float(record["p_mis"]),
                    p_mf_mis=float(record["p_mf_mis"]),
                    r_hat=float(record["r_hat"]),
                    eta=float(record["eta"]),
                    wall_ms=float(record["wall_ms"]),
                ))
    except OSError as e:
        raise TraceIOError(path, e) from e
    except (ValueError, KeyError) as e:
        raise TraceIOError(path, e) from e
    return rows


def replication_dir(out_dir, index: int) -> Path:
    return Path(out_dir) / f"rep_{index:03d}"


def write_replications(summary: ReplicationSummary, out_dir) -> Path:
    """One run directory per replication plus replications.json at the top."""
    for i, trace in enumerate(summary.traces):
        if trace.rows:
            write_trace(trace, replication_dir(out_dir, i))
    document = summary.to_dict()
    if summary.traces:
        document["config"] = summary.traces[0].config.model_dump(exclude_none=True)
    document["provenance"] = provenance()
    return write_json(Path(out_dir) / REPLICATIONS_FILE, document)


def write_tv_curve(curve: List[Tuple[int, float]], out_dir) -> Path:
    path = Path(out_dir) / TV_FILE
    _write_rows(path, ("n_evals", "tv"), [list(point) for point in curve])
    return path
