"""End-to-end reproductions of the published benchmark results. Run with --runslow."""

import math

import numpy as np
import pytest

from kde_ais.driver import RunConfig, dense_mc_ground_truth, run_replications, tv_distance_check
from kde_ais.driver.streams import RunStreams
from kde_ais.limit_states import get_benchmark

pytestmark = pytest.mark.slow

REPLICATIONS = 10


def final_estimates(config: RunConfig, column: str = "p_mf_mis") -> np.ndarray:
    summary = run_replications(config, replications=REPLICATIONS, base_seed=1000)
    assert not summary.partial
    for trace in summary.traces:
        assert trace.oracle_calls == config.budget
    return np.array([trace.rows[-1][column] for trace in summary.traces])


def assert_matches_truth(estimates: np.ndarray, truth: float, truth_stderr: float) -> None:
    stderr = math.sqrt(np.var(estimates, ddof=1) / len(estimates) + truth_stderr ** 2)
    assert abs(np.mean(estimates) - truth) <= 3 * stderr


def naive_mc_sd(truth: float, budget: int) -> float:
    return math.sqrt(truth * (1 - truth) / budget)


class TestHerbie:
    def test_threshold_2(self):
        truth, truth_stderr = dense_mc_ground_truth("herbie", t=2.0, n=200_000, repeats=10, streams=RunStreams(3))
        measured = get_benchmark("herbie").measured_probability(2.0)
        assert abs(truth - measured) <= 3 * math.sqrt(truth_stderr ** 2 + 0.0002 ** 2)
        config = RunConfig(benchmark="herbie", threshold=2.0)
        estimates = final_estimates(config)
        assert_matches_truth(estimates, truth, truth_stderr)
        assert np.std(estimates, ddof=1) < naive_mc_sd(truth, config.budget)

    @pytest.mark.xfail(
        strict=True,
        reason="published P_F(t=2) = 0.00199; dense MC on the implemented function gives 0.0926 +/- 0.0002",
    )
    def test_threshold_2_published_value(self):
        truth, truth_stderr = dense_mc_ground_truth("herbie", t=2.0, n=200_000, repeats=5, streams=RunStreams(4))
        assert abs(truth - 0.00199) <= 3 * truth_stderr

    def test_threshold_2_122(self):
        truth, truth_stderr = dense_mc_ground_truth("herbie", t=2.122, n=500_000, repeats=10, streams=RunStreams(5))
        estimates = final_estimates(RunConfig(benchmark="herbie", threshold=2.122))
        assert_matches_truth(estimates, truth, truth_stderr)


class TestFourBranch:
    @pytest.mark.parametrize("threshold", [2.0, 3.1])
    def test_published_value(self, threshold):
        reference = get_benchmark("four_branch").reference_probability(threshold)
        truth, truth_stderr = dense_mc_ground_truth(
            "four_branch", t=threshold, n=500_000, repeats=10, streams=RunStreams(6)
        )
        assert abs(truth - reference) <= 3 * truth_stderr
        estimates = final_estimates(RunConfig(benchmark="four_branch", threshold=threshold))
        assert_matches_truth(estimates, truth, truth_stderr)


class TestCantilever:
    def test_ground_truth_and_estimate(self):
        truth, stderr = dense_mc_ground_truth("cantilever", n=500_000, repeats=20, streams=RunStreams(1))
        assert abs(truth - 0.00035) <= 3 * stderr
        estimates = final_estimates(RunConfig(benchmark="cantilever"))
        assert_matches_truth(estimates, truth, stderr)


class TestShaft:
    def test_local_ground_truth_and_estimate(self):
        truth, stderr = dense_mc_ground_truth("shaft", n=2_000_000, repeats=10, streams=RunStreams(2))
        assert 1e-6 <= truth <= 1e-5
        config = RunConfig(benchmark="shaft")
        estimates = final_estimates(config)
        assert_matches_truth(estimates, truth, stderr)
        naive, _ = dense_mc_ground_truth("shaft", n=config.budget, repeats=REPLICATIONS, streams=RunStreams(7))
        rmse = math.sqrt(np.mean((estimates - truth) ** 2))
        assert rmse < naive_mc_sd(truth, config.budget)
        # At this budget naive MC almost never sees a failure
        assert naive <= 1.0 / config.budget


class TestProposalConvergence:
    def test_tv_shrinks_on_herbie(self):
        config = RunConfig(benchmark="herbie", threshold=2.0)
        summary = run_replications(config, replications=REPLICATIONS, base_seed=2000)
        converged = 0
        for trace in summary.traces:
            entries = trace.history.entries
            first = tv_distance_check(entries[1].proposal, "herbie", 2.0, grid_resolution=200)
            last = tv_distance_check(entries[-1].proposal, "herbie", 2.0, grid_resolution=200)
            converged += last < 0.35 and last < first
        assert converged >= 9
