import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kde_ais.estimators import (
    LabeledSamples,
    MixtureDensityCache,
    ProposalHistory,
    is_estimate,
    mf_mis_estimate,
    mis_estimate,
    mis_log_weights,
    mixture_density_bar_q,
    naive_mc,
    surrogate_error_estimate,
)
from kde_ais.limit_states import quadrant
from kde_ais.proposal import MixtureProposal, build_weighted_kde
from kde_ais.surrogate import ExactSurrogate
from kde_ais.utils.errors import InvalidArgumentError, NumericalFaultError


def quadrant_mixture(density, rng, eta, sharpness=0.9, pilot=None):
    if pilot is None:
        pilot = density.scaler.to_unit(density.sample(rng, 200))
    probs = np.where(quadrant(density.scaler.from_unit(pilot)) > 0, sharpness, 1 - sharpness)
    kde = build_weighted_kde(pilot, probs, 0.97, scaler=density.scaler)
    return MixtureProposal(kde, eta, density)


def labeled_from_history(history, rng, n):
    x, index = history.sample(rng, n)
    return LabeledSamples(x, quadrant(x), index)


class GridSurrogate:
    """Piecewise-constant failure probability on a 4 x 4 grid over [-1, 1]^2."""

    def __init__(self, values):
        self.values = values

    def cell(self, x):
        return np.clip(np.floor((np.atleast_2d(x) + 1.0) / 0.5).astype(int), 0, 3)

    def failure_probability(self, x, t):
        idx = self.cell(x)
        return self.values[idx[:, 0], idx[:, 1]]


class ConstantSurrogate:
    def __init__(self, value):
        self.value = value

    def failure_probability(self, x, t):
        return np.full(len(np.atleast_2d(x)), self.value)


class TestNaiveMonteCarlo:
    def test_all_fail(self):
        assert naive_mc(np.array([1.0, 2.0, 3.0]), 0.5) == 1.0

    def test_none_fail(self):
        assert naive_mc(np.array([1.0, 2.0, 3.0]), 5.0) == 0.0

    def test_threshold_is_strict(self):
        assert naive_mc(np.array([0.0, 1.0]), 0.0) == 0.5

    def test_quadrant(self, quadrant_density, rng):
        n = 1_000_000
        estimate = naive_mc(quadrant(quadrant_density.sample(rng, n)), 0.0)
        assert abs(estimate - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / n)

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            naive_mc(np.array([]), 0.0)


class TestImportanceSampling:
    @pytest.mark.parametrize("m", [1, 10, 100])
    def test_optimal_proposal_has_zero_variance(self, quadrant_density, quadrant_optimal, rng, m):
        estimates = []
        for _ in range(100):
            x = quadrant_optimal.sample(rng, m)
            estimates.append(is_estimate(LabeledSamples(x, quadrant(x)), quadrant_optimal, quadrant_density, 0.0))
        assert np.ptp(estimates) == 0.0
        assert estimates[0] == pytest.approx(0.25, rel=1e-12)

    def test_input_density_proposal_is_naive_mc(self, quadrant_density, rng):
        x = quadrant_density.sample(rng, 1000)
        samples = LabeledSamples(x, quadrant(x))
        assert is_estimate(samples, quadrant_density, quadrant_density, 0.0) == naive_mc(samples, 0.0)

    def test_unbiased_with_kde_proposal(self, quadrant_density, rng):
        proposal = quadrant_mixture(quadrant_density, rng, eta=0.2)
        estimates = []
        for _ in range(300):
            x = proposal.sample(rng, 50)
            estimates.append(is_estimate(LabeledSamples(x, quadrant(x)), proposal, quadrant_density, 0.0))
        estimates = np.array(estimates)
        assert abs(estimates.mean() - 0.25) <= 3 * estimates.std(ddof=1) / math.sqrt(len(estimates))

    def test_proposal_vanishing_at_a_sample(self, quadrant_density, quadrant_optimal):
        x = np.array([[-0.5, 0.5]])
        with pytest.raises(NumericalFaultError):
            is_estimate(LabeledSamples(x, quadrant(x)), quadrant_optimal, quadrant_density, 0.0)

    def test_unlabeled_samples(self, quadrant_density):
        with pytest.raises(InvalidArgumentError):
            is_estimate(LabeledSamples(np.zeros((2, 2))), quadrant_density, quadrant_density, 0.0)


class TestMixtureDensity:
    def test_input_density_only(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 10)
        x = quadrant_density.sample(rng, 50)
        np.testing.assert_array_equal(mixture_density_bar_q(history, x, log=True), quadrant_density.log_density(x))

    def test_equal_counts(self, quadrant_density, rng):
        proposal = quadrant_mixture(quadrant_density, rng, eta=0.0)
        history = ProposalHistory(quadrant_density, 10)
        history.append(proposal, 10)
        x = quadrant_density.sample(rng, 50)
        expected = 0.5 * quadrant_density.density(x) + 0.5 * proposal.density(x)
        np.testing.assert_allclose(mixture_density_bar_q(history, x), expected, rtol=1e-10)

    def test_weights_follow_counts(self, quadrant_density, quadrant_optimal, rng):
        pilot = quadrant_density.scaler.to_unit(quadrant_density.sample(rng, 200))
        first = quadrant_mixture(quadrant_density, rng, eta=0.3, sharpness=0.8, pilot=pilot)
        second = quadrant_mixture(quadrant_density, rng, eta=0.1, sharpness=0.95, pilot=pilot)
        history = ProposalHistory(quadrant_density, 5)
        history.append(first, 5)
        history.append(second, 10)
        history.append(quadrant_optimal, 20)
        x = quadrant_density.sample(rng, 100)
        expected = (
            5 * quadrant_density.density(x)
            + 5 * first.density(x)
            + 10 * second.density(x)
            + 20 * quadrant_optimal.density(x)
        ) / 40
        np.testing.assert_allclose(history.density(x), expected, rtol=1e-10)
        np.testing.assert_allclose(history.proportions, [0.125, 0.125, 0.25, 0.5])

    def test_integrates_to_one_with_restricted_kernels(self, quadrant_density, rng):
        pilot = quadrant_density.scaler.to_unit(quadrant_density.sample(rng, 200))
        history = ProposalHistory(quadrant_density, 20)
        history.append(quadrant_mixture(quadrant_density, rng, eta=0.3, pilot=pilot), 20)
        history.append(quadrant_mixture(quadrant_density, rng, eta=0.0, sharpness=0.99, pilot=pilot), 40)
        step = 2.0 / 400
        axis = np.linspace(-1 + step / 2, 1 - step / 2, 400)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        values = history.density(np.column_stack([xx.ravel(), yy.ravel()]))
        assert values.sum() * step * step == pytest.approx(1.0, abs=1e-4)

    def test_append_refreshes_density(self, quadrant_density, quadrant_optimal):
        history = ProposalHistory(quadrant_density, 10)
        x = np.array([0.5, 0.5])
        before = history.density(x)
        history.append(quadrant_optimal, 10)
        assert history.density(x) == pytest.approx(0.5 * before + 0.5 * 1.0)

    def test_rejects_empty_entries(self, quadrant_density, quadrant_optimal):
        with pytest.raises(InvalidArgumentError):
            ProposalHistory(quadrant_density, 0)
        history = ProposalHistory(quadrant_density, 1)
        with pytest.raises(InvalidArgumentError):
            history.append(quadrant_optimal, 0)


class TestMixtureDensityCache:
    def test_input_density_only_is_exact(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 30)
        cache = MixtureDensityCache(history)
        x = quadrant_density.sample(rng, 30)
        cache.extend(x)
        np.testing.assert_array_equal(cache.log_density(), quadrant_density.log_density(x))

    def test_tracks_growing_history(self, quadrant_density, quadrant_optimal, rng):
        pilot = quadrant_density.scaler.to_unit(quadrant_density.sample(rng, 200))
        history = ProposalHistory(quadrant_density, 20)
        cache = MixtureDensityCache(history)
        cache.extend(quadrant_density.sample(rng, 20))
        for k, (eta, count) in enumerate([(0.5, 5), (0.3, 5), (0.1, 10)]):
            proposal = quadrant_mixture(quadrant_density, rng, eta=eta, sharpness=0.8 + 0.05 * k, pilot=pilot)
            history.append(proposal, count)
            cache.extend(proposal.sample(rng, count))
        history.append(quadrant_optimal, 7)
        cache.extend(quadrant_optimal.sample(rng, 7))
        assert len(cache) == history.total
        np.testing.assert_allclose(cache.log_density(), history.log_density(cache.points), rtol=1e-10)

    def test_catches_up_without_new_points(self, quadrant_density, quadrant_optimal, rng):
        history = ProposalHistory(quadrant_density, 10)
        cache = MixtureDensityCache(history)
        cache.extend(np.array([[0.5, 0.5], [-0.5, 0.5]]))
        history.append(quadrant_optimal, 10)
        np.testing.assert_allclose(np.exp(cache.log_density()), [0.125 + 0.5, 0.125], rtol=1e-12)

    def test_empty_extend_is_a_no_op(self, quadrant_density):
        cache = MixtureDensityCache(ProposalHistory(quadrant_density, 3))
        cache.extend(np.empty((0, 2)))
        assert len(cache) == 0
        assert cache.log_density().shape == (0,)


class TestAllocation:
    def test_largest_remainder(self, quadrant_density, quadrant_optimal):
        history = ProposalHistory(quadrant_density, 1)
        history.append(quadrant_optimal, 1)
        history.append(quadrant_optimal, 1)
        np.testing.assert_array_equal(history.allocate(5), [2, 2, 1])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(1, 1000), min_size=1, max_size=8), st.integers(0, 5000))
    def test_allocation_sums_to_request(self, counts, n):
        from kde_ais.inputs import InputDensity, UniformMarginal

        density = InputDensity([UniformMarginal(0.0, 1.0)])
        history = ProposalHistory(density, counts[0])
        for count in counts[1:]:
            history.append(density, count)
        alloc = history.allocate(n)
        assert alloc.sum() == n
        assert np.all(np.abs(alloc - n * np.array(counts) / sum(counts)) < 1)

    def test_sample_tags_entries(self, quadrant_density, quadrant_optimal, rng):
        history = ProposalHistory(quadrant_density, 30)
        history.append(quadrant_optimal, 10)
        x, index = history.sample(rng, 40)
        np.testing.assert_array_equal(np.bincount(index), [30, 10])
        assert np.all(x[index == 1] >= 0)


class TestMultipleImportanceSampling:
    def test_input_density_only_is_naive_mc(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 500)
        samples = labeled_from_history(history, rng, 500)
        assert mis_estimate(samples, history, quadrant_density, 0.0) == naive_mc(samples, 0.0)

    def test_count_mismatch(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 10)
        samples = labeled_from_history(ProposalHistory(quadrant_density, 9), rng, 9)
        with pytest.raises(InvalidArgumentError):
            mis_estimate(samples, history, quadrant_density, 0.0)

    def test_unknown_proposal_index(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 4)
        x = quadrant_density.sample(rng, 4)
        samples = LabeledSamples(x, quadrant(x), [0, 0, 0, 3])
        with pytest.raises(InvalidArgumentError):
            mis_estimate(samples, history, quadrant_density, 0.0)

    def test_balance_heuristic_weights(self, quadrant_density, quadrant_optimal):
        history = ProposalHistory(quadrant_density, 50)
        history.append(quadrant_optimal, 50)
        x = np.array([[0.5, 0.5], [-0.5, 0.5]])
        weights = np.exp(mis_log_weights(x, history, quadrant_density))
        np.testing.assert_allclose(weights, [0.25 / (0.125 + 0.5), 0.25 / 0.125])

    def test_unbiased(self, quadrant_density, rng):
        history = ProposalHistory(quadrant_density, 20)
        history.append(quadrant_mixture(quadrant_density, rng, eta=0.3), 20)
        estimates = []
        for _ in range(500):
            samples = labeled_from_history(history, rng, 40)
            estimates.append(mis_estimate(samples, history, quadrant_density, 0.0))
        estimates = np.array(estimates)
        assert abs(estimates.mean() - 0.25) <= 3 * estimates.std(ddof=1) / math.sqrt(len(estimates))


class TestMultifidelity:
    def _setup(self, density, rng):
        history = ProposalHistory(density, 20)
        history.append(quadrant_mixture(density, rng, eta=0.3), 30)
        return history, labeled_from_history(history, rng, 50)

    def test_exact_surrogate_on_same_points_is_mis(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        result = mf_mis_estimate(
            LabeledSamples(samples.x), samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0
        )
        assert result.correction_term == 0.0
        assert result.value == mis_estimate(samples, history, quadrant_density, 0.0)

    def test_perfect_surrogate_needs_no_correction(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        cheap, _ = history.sample(rng, 5000)
        result = mf_mis_estimate(
            LabeledSamples(cheap), samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0
        )
        assert result.correction_term == 0.0
        assert result.n_surrogate == 5000
        assert result.value == pytest.approx(0.25, abs=0.05)

    def test_without_surrogate_samples(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        result = mf_mis_estimate(None, samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0)
        assert result.value == mis_estimate(samples, history, quadrant_density, 0.0)
        assert result.n_surrogate == 0

    def test_subsample_at_least_predicted_count_is_exact(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        cheap = LabeledSamples(history.sample(rng, 400)[0])
        full = mf_mis_estimate(cheap, samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0)
        capped = mf_mis_estimate(
            cheap, samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0, weight_subsample=400
        )
        assert capped.value == full.value

    def test_subsample_needs_rng(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        cheap = LabeledSamples(history.sample(rng, 400)[0])
        with pytest.raises(InvalidArgumentError):
            mf_mis_estimate(cheap, samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0, weight_subsample=5)

    def test_subsampled_surrogate_term_is_unbiased(self, quadrant_density, rng):
        history, samples = self._setup(quadrant_density, rng)
        cheap = LabeledSamples(history.sample(rng, 2000)[0])
        surrogate = ExactSurrogate(quadrant)
        full = mf_mis_estimate(cheap, samples, history, surrogate, quadrant_density, 0.0).surrogate_term
        terms = np.array([
            mf_mis_estimate(
                cheap, samples, history, surrogate, quadrant_density, 0.0, weight_subsample=50, rng=rng
            ).surrogate_term
            for _ in range(400)
        ])
        assert terms.std() > 0.0
        assert abs(terms.mean() - full) <= 3 * terms.std(ddof=1) / math.sqrt(len(terms))

    def test_negative_sum_is_clamped(self, quadrant_density):
        class Pessimist:
            def predict_mean(self, x):
                return np.where(np.atleast_2d(x)[:, 0] < 0, 1.0, -1.0)

        history = ProposalHistory(quadrant_density, 4)
        expensive = LabeledSamples(np.array([[-0.5, 0.1]] * 4), np.full(4, -1.0))
        cheap = LabeledSamples(np.array([[0.5, 0.5]] * 10))
        result = mf_mis_estimate(cheap, expensive, history, Pessimist(), quadrant_density, 0.0)
        assert result.raw == pytest.approx(-1.0)
        assert result.value == 0.0

    def test_unbiased_with_imperfect_surrogate(self, quadrant_density, rng):
        class Shifted:
            def predict_mean(self, x):
                return quadrant(x) - 0.2

        estimates = []
        for _ in range(200):
            history, samples = self._setup(quadrant_density, rng)
            cheap, _ = history.sample(rng, 2000)
            estimates.append(
                mf_mis_estimate(LabeledSamples(cheap), samples, history, Shifted(), quadrant_density, 0.0).raw
            )
        estimates = np.array(estimates)
        assert abs(estimates.mean() - 0.25) <= 3 * estimates.std(ddof=1) / math.sqrt(len(estimates))


class TestSurrogateError:
    def _samples(self, density, rng):
        history = ProposalHistory(density, 20)
        history.append(quadrant_mixture(density, rng, eta=0.3), 30)
        return history, labeled_from_history(history, rng, 50)

    def test_perfect_classifier_gives_zero(self, quadrant_density, rng):
        history, samples = self._samples(quadrant_density, rng)
        assert surrogate_error_estimate(samples, history, ExactSurrogate(quadrant), quadrant_density, 0.0) == 0.0

    def test_never_fail_gives_mis(self, quadrant_density, rng):
        history, samples = self._samples(quadrant_density, rng)
        r_hat = surrogate_error_estimate(samples, history, ConstantSurrogate(0.0), quadrant_density, 0.0)
        assert r_hat == mis_estimate(samples, history, quadrant_density, 0.0)

    def test_always_fail_gives_complement(self, quadrant_density, rng):
        history, samples = self._samples(quadrant_density, rng)
        r_hat = surrogate_error_estimate(samples, history, ConstantSurrogate(1.0), quadrant_density, 0.0)
        weights = np.exp(mis_log_weights(samples.x, history, quadrant_density))
        expected = np.sum(weights) / history.total - mis_estimate(samples, history, quadrant_density, 0.0)
        assert r_hat == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_equals_weighted_absolute_error(self, quadrant_density, rng):
        history, samples = self._samples(quadrant_density, rng)
        surrogate = GridSurrogate(np.linspace(0.0, 1.0, 16).reshape(4, 4))
        weights = np.exp(mis_log_weights(samples.x, history, quadrant_density))
        error = np.abs(surrogate.failure_probability(samples.x, 0.0) - (samples.y > 0.0))
        expected = np.sum(weights * error) / history.total
        r_hat = surrogate_error_estimate(samples, history, surrogate, quadrant_density, 0.0)
        assert r_hat == pytest.approx(expected, rel=1e-12)

    def test_unbiased_on_grid_surrogate(self, quadrant_density, quadrant_optimal, rng):
        values = np.linspace(0.0, 1.0, 16).reshape(4, 4)
        surrogate = GridSurrogate(values)
        centers = np.linspace(-0.75, 0.75, 4)
        failing = (centers[:, None] > 0) & (centers[None, :] > 0)
        exact = float(np.mean(np.where(failing, 1.0 - values, values)))

        estimates = []
        for _ in range(500):
            history = ProposalHistory(quadrant_density, 20)
            history.append(quadrant_optimal, 20)
            samples = labeled_from_history(history, rng, 40)
            estimates.append(surrogate_error_estimate(samples, history, surrogate, quadrant_density, 0.0))
        estimates = np.array(estimates)
        assert abs(estimates.mean() - exact) <= 3 * estimates.std(ddof=1) / math.sqrt(len(estimates))
