"""Experiment file schema and parsing.

An experiment file is a JSON object with the RunConfig fields plus an
optional ``inputs`` list declaring one marginal per dimension. Schema problems
(unknown key, wrong type, malformed JSON) raise ConfigParseError; values that
break a run invariant raise ConfigValidationError.
"""

import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..driver.schemas import RunConfig
from ..inputs import InputDensity, marginal_from_dict
from ..limit_states import get_benchmark
from ..utils.errors import ConfigParseError, ConfigValidationError

logger = logging.getLogger(__name__)

# Error types pydantic reports for failed value checks, as opposed to schema mismatches
_VALUE_ERROR_TYPES = {"value_error", "assertion_error"}


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class UniformSpec(_Spec):
    dist: Literal["uniform"]
    lo: float
    hi: float


class NormalSpec(_Spec):
    dist: Literal["normal"]
    mean: float
    sd: float


class LognormalSpec(_Spec):
    """Either (mu_log, sigma_log) or (mean, cv)."""

    dist: Literal["lognormal"]
    mu_log: Optional[float] = None
    sigma_log: Optional[float] = None
    mean: Optional[float] = None
    cv: Optional[float] = None

    @model_validator(mode="after")
    def _one_parameterization(self) -> "LognormalSpec":
        log_params = self.mu_log is not None and self.sigma_log is not None
        moment_params = self.mean is not None and self.cv is not None
        if log_params == moment_params:
            raise ValueError("lognormal needs exactly one of (mu_log, sigma_log) or (mean, cv)")
        return self


class TruncatedNormalSpec(_Spec):
    dist: Literal["truncated_normal"]
    mean: float
    sd: float
    lo: float
    hi: float


MarginalSpec = Annotated[
    Union[UniformSpec, NormalSpec, LognormalSpec, TruncatedNormalSpec],
    Field(discriminator="dist"),
]


class ExperimentFile(RunConfig):
    inputs: Optional[List[MarginalSpec]] = None

    @model_validator(mode="after")
    def _check_inputs(self) -> "ExperimentFile":
        if self.inputs is not None:
            dimension = get_benchmark(self.benchmark).dimension
            if len(self.inputs) != dimension:
                raise ValueError(f"{self.benchmark} has {dimension} inputs but {len(self.inputs)} marginals were declared")
            self.input_density()
        return self

    def input_density(self) -> InputDensity:
        """Declared input model, or the benchmark's own."""
        if self.inputs is None:
            return get_benchmark(self.benchmark).input_density()
        return InputDensity([marginal_from_dict(spec.model_dump(exclude_none=True)) for spec in self.inputs])


def _describe(errors: List[Dict[str, Any]]) -> str:
    parts = []
    for err in errors:
        loc = ".".join(str(p) for p in err.get("loc", ()))
        parts.append(f"{loc}: {err['msg']}" if loc else err["msg"])
    return "; ".join(parts)


def validate_config(raw: Any) -> ExperimentFile:
    """Validate a decoded experiment document."""
    try:
        return ExperimentFile.model_validate(raw)
    except ValidationError as e:
        errors = e.errors()
        schema_errors = [err for err in errors if err["type"] not in _VALUE_ERROR_TYPES]
        if schema_errors:
            raise ConfigParseError(_describe(schema_errors)) from None
        raise ConfigValidationError(_describe(errors)) from None


def parse_config(path) -> Tuple[ExperimentFile, InputDensity]:
    """Read, validate and default-fill an experiment file.

    Raises:
        ConfigParseError: unreadable file, malformed JSON or schema mismatch.
        ConfigValidationError: a run invariant is violated.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as e:
        raise ConfigParseError(f"{path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"{path}: invalid JSON ({e})") from e
    config = validate_config(raw)
    logger.info("[config] Loaded %s: %s t=%g, budget %d", path, config.benchmark, config.threshold, config.budget)
    return config, config.input_density()


def with_overrides(config: ExperimentFile, **overrides) -> ExperimentFile:
    """Re-validate ``config`` with command-line overrides (None values ignored)."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return config
    return validate_config({**config.model_dump(exclude_none=True), **updates})


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config.model_dump(exclude_none=True), indent=2, sort_keys=True)
