import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kde_ais.schemas import Dataset
from kde_ais.surrogate import (
    MATERN_5_2,
    SQUARED_EXPONENTIAL,
    ExactSurrogate,
    FitOptions,
    KernelConfig,
    failure_probability_from_moments,
    fit_gp,
    gp_factory,
    kernel_matrix,
    posterior,
    soft_failure_prob,
)
from kde_ais.surrogate.kernels import kernel_with_gradients
from kde_ais.utils.errors import GPFittingError, InvalidArgumentError


def _fixed(lengthscale, d=1, variance=1.0, **kw):
    kernel = KernelConfig(SQUARED_EXPONENTIAL, (lengthscale,) * d, variance)
    return FitOptions(warm_start=kernel, optimize=False, **kw)


class TestKernels:
    @pytest.mark.parametrize("family", [SQUARED_EXPONENTIAL, MATERN_5_2])
    def test_gradients_match_finite_differences(self, family, rng):
        x = rng.random((6, 2))
        kernel = KernelConfig(family, (0.4, 0.7), 1.3)
        _, grads = kernel_with_gradients(kernel, x)
        step = 1e-6
        for i in range(len(kernel.theta)):
            up, down = kernel.theta.copy(), kernel.theta.copy()
            up[i] += step
            down[i] -= step
            numeric = (kernel_matrix(kernel.with_theta(up), x, x) - kernel_matrix(kernel.with_theta(down), x, x)) / (2 * step)
            np.testing.assert_allclose(grads[i], numeric, rtol=1e-5, atol=1e-8)

    def test_rejects_nonpositive_lengthscale(self):
        with pytest.raises(InvalidArgumentError):
            KernelConfig(SQUARED_EXPONENTIAL, (0.0,))

    def test_matern_at_zero_distance(self):
        kernel = KernelConfig(MATERN_5_2, (0.5,), 2.0)
        assert kernel_matrix(kernel, np.zeros((1, 1)), np.zeros((1, 1)))[0, 0] == pytest.approx(2.0)


class TestFit:
    def test_interpolates_linear_data(self):
        x = np.linspace(0.0, 1.0, 5)[:, None]
        gp = fit_gp(Dataset(x, x[:, 0]), options=_fixed(0.1))
        mean, var = gp.predict(x)
        assert np.max(np.abs(mean - x[:, 0])) <= 1e-6 * gp.y_scale
        assert np.all(var <= gp.y_scale ** 2 * (gp.kernel.nugget + 1e-8))

    def test_recovers_lengthscale(self):
        rng = np.random.default_rng(3)
        x = np.linspace(0.0, 1.0, 40)[:, None]
        truth = KernelConfig(SQUARED_EXPONENTIAL, (0.2,), 1.0)
        cov = kernel_matrix(truth, x, x) + 1e-8 * np.eye(40)
        y = rng.multivariate_normal(np.zeros(40), cov)
        gp = fit_gp(Dataset(x, y), options=FitOptions(rng=np.random.default_rng(0)))
        assert 0.1 <= gp.kernel.lengthscales[0] <= 0.4

    def test_optimum_beats_every_start(self, rng):
        x = rng.random((12, 2))
        y = np.sin(4 * x[:, 0]) + x[:, 1] ** 2
        gp = fit_gp(Dataset(x, y), options=FitOptions(rng=np.random.default_rng(1)))
        assert len(gp.start_log_likelihoods) == 8
        assert gp.log_marginal_likelihood >= max(gp.start_log_likelihoods) - 1e-6

    def test_duplicate_points_absorbed_by_nugget(self, caplog):
        x = np.array([[0.5], [0.5], [0.5], [0.0], [1.0]])
        y = np.array([1.0, 1.0, 1.0, 0.0, 0.0])
        with caplog.at_level(logging.WARNING, logger="kde_ais.surrogate.gp"):
            gp = fit_gp(Dataset(x, y), options=_fixed(0.3, nugget=0.0))
        assert gp.kernel.nugget == pytest.approx(1e-8)
        assert "needed nugget" in caplog.text

    def test_identical_points_equal_outputs(self):
        gp = fit_gp(Dataset(np.array([[0.5], [0.5]]), np.array([1.0, 1.0])))
        assert gp.constant_fallback
        assert gp.predict_mean(np.array([0.5])) == pytest.approx(1.0)

    def test_indefinite_after_max_nugget(self):
        x = np.full((10, 1), 0.5)
        with pytest.raises(GPFittingError):
            fit_gp(Dataset(x, np.ones(10)), options=FitOptions(nugget=0.0, max_nugget=0.0))

    @pytest.mark.parametrize("x, y", [
        (np.array([[0.0]]), np.array([1.0])),
        (np.array([[0.0], [np.nan]]), np.array([1.0, 2.0])),
    ])
    def test_rejects_bad_data(self, x, y):
        with pytest.raises(InvalidArgumentError):
            fit_gp(Dataset(x, y))

    def test_factory_warm_starts(self, rng):
        x = rng.random((8, 1))
        data = Dataset(x, np.cos(3 * x[:, 0]))
        factory = gp_factory(n_starts=3)
        first = factory(data, rng=np.random.default_rng(0))
        second = factory(data, rng=np.random.default_rng(1), warm_start=first)
        assert len(second.start_log_likelihoods) == 3
        # The previous optimum is the first start
        assert second.start_log_likelihoods[0] == pytest.approx(first.log_marginal_likelihood, abs=1e-6)


class TestPosterior:
    def test_two_point_hand_solve(self):
        x = np.array([[0.0], [0.6]])
        y = np.array([1.0, -0.5])
        options = _fixed(0.5, variance=2.0, standardize=False)
        gp = fit_gp(Dataset(x, y), options=options)
        kernel = gp.kernel
        gram = kernel_matrix(kernel, x, x) + kernel.nugget * np.eye(2)
        query = np.array([[0.3]])
        k_star = kernel_matrix(kernel, query, x)[0]
        mean, var = posterior(gp, query[0])
        assert mean == pytest.approx(k_star @ np.linalg.solve(gram, y), abs=1e-10)
        assert var == pytest.approx(2.0 - k_star @ np.linalg.solve(gram, k_star), abs=1e-10)

    def test_reverts_to_prior_far_away(self):
        x = np.linspace(0.0, 1.0, 5)[:, None]
        gp = fit_gp(Dataset(x, np.sin(x[:, 0])), options=_fixed(0.1))
        far = gp.scaler.from_unit(np.array([[6.0]]))
        mean, var = gp.predict(far)
        assert mean[0] == pytest.approx(gp.prior_mean, rel=1e-3)
        assert var[0] == pytest.approx(gp.prior_variance, rel=1e-3)

    def test_variance_bounded_by_prior(self, rng):
        x = rng.random((15, 2))
        gp = fit_gp(Dataset(x, x.sum(axis=1) ** 2), options=FitOptions(rng=np.random.default_rng(2)))
        _, var = gp.predict(rng.random((200, 2)), standardized=True)
        assert np.all(var >= 0)
        assert np.all(var <= gp.kernel.signal_variance + gp.kernel.nugget)

    def test_mean_only_path_matches_predict(self, rng):
        x = rng.random((15, 2))
        gp = fit_gp(Dataset(x, np.sin(3 * x[:, 0]) + x[:, 1]), options=_fixed(0.4, d=2))
        points = rng.random((300, 2))
        np.testing.assert_allclose(gp.predict_mean(points), gp.predict(points)[0], rtol=1e-12, atol=1e-14)
        assert gp.predict_mean(points[0]) == pytest.approx(gp.predict(points[0])[0], rel=1e-12)

    def test_summary_is_json_ready(self, rng):
        x = rng.random((5, 1))
        summary = fit_gp(Dataset(x, x[:, 0] ** 2), options=_fixed(0.3)).summary()
        assert summary["kind"] == "gp"
        assert summary["n"] == 5
        assert isinstance(summary["lengthscales"], list)


class TestSoftFailureProbability:
    def test_mean_at_threshold(self):
        assert failure_probability_from_moments([2.0], [0.3], 2.0)[0] == pytest.approx(0.5)

    def test_degenerate_sd(self):
        np.testing.assert_array_equal(failure_probability_from_moments([2.5, 1.5], [0.0, 0.0], 2.0), [1.0, 0.0])

    def test_one_sd_above(self):
        assert failure_probability_from_moments([1.7], [0.7], 1.0)[0] == pytest.approx(0.841345, abs=1e-6)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(-10, 10), st.floats(0.0, 5.0), st.floats(0.01, 5.0), st.floats(-10, 10),
    )
    def test_bounded_and_monotone(self, mean, shift, sd, t):
        low, high = failure_probability_from_moments([mean, mean + shift], [sd, sd], t)
        assert 0.0 <= low <= high <= 1.0
        lower_t = failure_probability_from_moments([mean], [sd], t - shift)[0]
        assert lower_t >= low

    def test_gp_wrapper_matches_moments(self, rng):
        x = rng.random((6, 1))
        gp = fit_gp(Dataset(x, 3 * x[:, 0]), options=_fixed(0.3))
        query = rng.random((20, 1))
        mean, var = gp.predict(query)
        expected = stats.norm.sf((1.0 - mean) / np.sqrt(var))
        np.testing.assert_allclose(soft_failure_prob(gp, query, 1.0), expected, rtol=1e-12, atol=1e-300)

    def test_exact_surrogate_is_indicator(self):
        surrogate = ExactSurrogate(lambda x: np.min(x, axis=1))
        probs = surrogate.failure_probability(np.array([[0.5, 0.5], [-0.1, 0.9]]), 0.0)
        np.testing.assert_array_equal(probs, [1.0, 0.0])
