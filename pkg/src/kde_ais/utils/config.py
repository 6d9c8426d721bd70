import logging
import os
from typing import Optional

# Defaults from the published experiments
DEFAULT_ALPHA = 0.97
DEFAULT_BANDWIDTH = 0.2
DEFAULT_C = 0.3

# Not fixed by the experiments; 0 < gamma < 1 is all that is required
DEFAULT_GAMMA = 0.5

# Desk-scale pilot size (the experiments use 1e7)
DEFAULT_PILOT_SIZE = 200_000
DEFAULT_MF_MIS_SAMPLES = 100_000
# Cheap points at which p / q_bar is evaluated for the MF-MIS surrogate term
DEFAULT_MF_MIS_WEIGHT_SAMPLES = 1_000

# GP fitting
DEFAULT_GP_STARTS = 8
DEFAULT_NUGGET = 1e-8
MAX_NUGGET = 1e-2
SIGMA_FLOOR = 1e-12

# KDE components with normalized weight below WEIGHT_FLOOR / m are dropped
WEIGHT_FLOOR = 1e-12

DEFAULT_TWO_STAGE_SPLIT = 0.5

# Redraw rounds for KDE draws that leave a bounded support; leftovers are clamped
MAX_REDRAWS = 100

# Rows of the evaluation matrix processed per chunk in kernel sums
KERNEL_CHUNK_ENTRIES = 4_000_000

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_log_level() -> str:
    return os.getenv("KDE_AIS_LOG_LEVEL", "INFO").upper()


def get_max_workers() -> int:
    """Worker threads used for concurrent replications."""
    try:
        return max(1, int(os.getenv("KDE_AIS_MAX_WORKERS", "4")))
    except ValueError:
        return 4


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for CLI use. Library modules only create loggers."""
    logging.basicConfig(level=(level or get_log_level()).upper(), format=LOG_FORMAT)
