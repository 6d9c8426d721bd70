"""Error types. Each carries the exit code the CLI reports for it."""


class KdeAisError(Exception):
    exit_code = 1


class ConfigError(KdeAisError):
    exit_code = 2


class ConfigParseError(ConfigError):
    """The experiment file does not match the schema (unknown key, wrong type, bad JSON)."""


class ConfigValidationError(ConfigError):
    """The experiment file parsed but violates a run invariant."""


class InvalidArgumentError(KdeAisError, ValueError):
    exit_code = 2


class NumericalFaultError(KdeAisError):
    exit_code = 3


class GPFittingError(NumericalFaultError):
    """Kernel matrix stayed indefinite after the nugget reached its ceiling."""


class DegenerateWeightsError(NumericalFaultError):
    """Every pilot weight is zero, so the KDE target is undefined."""


class TraceIOError(KdeAisError):
    exit_code = 4

    def __init__(self, path, cause: Exception):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{self.path}: {cause}")
