from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..utils.errors import InvalidArgumentError


@dataclass
class LabeledSamples:
    """A batch of points, their oracle values (None for surrogate-only draws) and
    the index of the history entry that generated each point."""

    x: np.ndarray
    y: Optional[np.ndarray] = None
    proposal_index: np.ndarray = field(default=None)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        n = len(self.x)
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float).reshape(-1)
            if len(self.y) != n:
                raise InvalidArgumentError(f"{n} points but {len(self.y)} labels")
        if self.proposal_index is None:
            self.proposal_index = np.zeros(n, dtype=int)
        else:
            self.proposal_index = np.asarray(self.proposal_index, dtype=int).reshape(-1)
            if len(self.proposal_index) != n:
                raise InvalidArgumentError(f"{n} points but {len(self.proposal_index)} proposal indices")
            if n and self.proposal_index.min() < 0:
                raise InvalidArgumentError("proposal indices must be nonnegative")

    def __len__(self) -> int:
        return len(self.x)

    @property
    def labeled(self) -> bool:
        return self.y is not None

    def failures(self, t: float) -> np.ndarray:
        if self.y is None:
            raise InvalidArgumentError("samples carry no oracle labels")
        return self.y > t

    def extend(self, other: "LabeledSamples") -> "LabeledSamples":
        if self.labeled != other.labeled:
            raise InvalidArgumentError("cannot mix labeled and unlabeled samples")
        y = np.concatenate([self.y, other.y]) if self.labeled else None
        return LabeledSamples(
            np.vstack([self.x, other.x]), y, np.concatenate([self.proposal_index, other.proposal_index])
        )
