from typing import Protocol, Tuple

import numpy as np


class Surrogate(Protocol):
    """What the sampler and estimators need from a fitted surrogate."""

    def predict(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ...

    def predict_mean(self, x: np.ndarray) -> np.ndarray:
        ...

    def failure_probability(self, x: np.ndarray, t: float) -> np.ndarray:
        ...

    def summary(self) -> dict:
        ...
