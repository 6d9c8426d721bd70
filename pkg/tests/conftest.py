import os
import sys

import numpy as np
import pytest

# Define project root and add `src` to sys.path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
src_root = os.path.join(project_root, "src")
if src_root not in sys.path:
    sys.path.insert(0, src_root)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance reproduction (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quadrant_density():
    from kde_ais.inputs import InputDensity, UniformMarginal

    return InputDensity([UniformMarginal(-1.0, 1.0), UniformMarginal(-1.0, 1.0)])


@pytest.fixture
def quadrant_optimal():
    """q_star for the quadrant problem: uniform on [0, 1]^2."""
    from kde_ais.inputs import InputDensity, UniformMarginal

    return InputDensity([UniformMarginal(0.0, 1.0), UniformMarginal(0.0, 1.0)])
