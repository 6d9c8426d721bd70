"""Data shared across modules."""

from dataclasses import dataclass, field

import numpy as np

from .utils.errors import InvalidArgumentError


@dataclass
class Dataset:
    """Oracle evaluations in acquisition order: inputs (n, d) and outputs (n,)."""

    x: np.ndarray
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if len(self.x) != len(self.y):
            raise InvalidArgumentError(
                f"dataset has {len(self.x)} inputs but {len(self.y)} outputs"
            )

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dimension(self) -> int:
        return self.x.shape[1]

    def extend(self, x: np.ndarray, y: np.ndarray) -> "Dataset":
        """Return a new dataset with the batch appended."""
        return Dataset(np.vstack([self.x, np.atleast_2d(x)]), np.concatenate([self.y, np.ravel(y)]))
