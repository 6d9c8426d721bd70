"""Named random substreams derived from one run seed.

Every consumer of randomness gets its own generator keyed by (name, index), so
adding an estimator or changing M_tot never shifts the sample path of the
oracle-facing draws.
"""

import numpy as np

STREAM_CODES = {
    "pilot": 0,
    "seed_design": 1,
    "batch": 2,
    "mf_mis": 3,
    "gp": 4,
    "stage_two": 5,
    "truth": 6,
}


class RunStreams:
    def __init__(self, seed: int):
        self.seed = int(seed)

    def generator(self, name: str, *index: int) -> np.random.Generator:
        try:
            code = STREAM_CODES[name]
        except KeyError:
            raise KeyError(f"unknown random stream {name!r}") from None
        key = (code,) + tuple(int(i) for i in index)
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))
