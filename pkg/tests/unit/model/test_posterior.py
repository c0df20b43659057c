from dataclasses import replace

import numpy as np
import pytest
import scipy.stats

from mcdh.config import PriorConfig
from mcdh.errors import ConsistencyError
from mcdh.model import McdhModel, LogitModel, Panel, ParameterState, Posterior, log_posterior
from mcdh.model.choice import log_likelihood
from mcdh.harness.pipeline import build_model


def finite_difference_gradient(density, vector, step=1e-5):
    gradient = np.empty_like(vector)
    for index in range(len(vector)):
        shift = np.zeros_like(vector)
        shift[index] = step
        gradient[index] = (density(vector + shift)[0] - density(vector - shift)[0]) / (2 * step)

    return gradient


def assert_gradient_matches(model, panel, points=20, seed=0):
    posterior = Posterior(model, panel)
    rng = np.random.default_rng(seed)
    for _ in range(points):
        vector = model.initial_state(rng).vector
        _, gradient = posterior(vector)
        numeric = finite_difference_gradient(posterior, vector)
        assert np.linalg.norm(gradient - numeric) <= 1e-5 * np.linalg.norm(gradient)


@pytest.fixture
def model(tiny_panel):
    return McdhModel(tiny_panel.dims, grid=tiny_panel.grid)


class TestPosterior:
    def test_gradient_matches_finite_differences(self, model, tiny_panel):
        posterior = Posterior(model, tiny_panel)
        vector = model.initial_state(np.random.default_rng(0), radius=0.5).vector
        _, gradient = posterior(vector)
        numeric = finite_difference_gradient(posterior, vector)
        assert np.linalg.norm(gradient - numeric) <= 1e-5 * np.linalg.norm(gradient)

    def test_gradient_at_random_points_with_two_factors(self, gradient_panel):
        assert_gradient_matches(build_model("mcdh", gradient_panel, factors=2), gradient_panel)

    def test_likelihood_matches_numpy(self, model, tiny_panel):
        state = model.initial_state(np.random.default_rng(1))
        assert Posterior(model, tiny_panel).log_likelihood(state) == pytest.approx(log_likelihood(tiny_panel, model.constrain(state)["beta"]), rel=1e-10)

    def test_parts_add_up(self, model, tiny_panel):
        posterior = Posterior(model, tiny_panel)
        state = model.initial_state(np.random.default_rng(2))
        assert posterior.log_posterior(state).value == pytest.approx(posterior.log_prior(state) + posterior.log_likelihood(state), rel=1e-12)

    def test_empty_panel_is_prior(self, model, tiny_panel):
        empty = Panel.empty(tiny_panel.dims, grid=tiny_panel.grid)
        state = model.initial_state(np.random.default_rng(3))
        assert Posterior(model, empty).log_posterior(state).value == pytest.approx(Posterior(model, tiny_panel).log_prior(state), rel=1e-12)

    def test_empty_panel_closed_form_prior(self, tiny_panel):
        priors = PriorConfig()
        model = LogitModel(tiny_panel.dims.with_factors(0), grid=tiny_panel.grid, priors=priors)
        state = model.initial_state(np.random.default_rng(4))
        blocks = state.blocks()

        sigma = np.exp(blocks["log_sigma"])
        expected = (
            scipy.stats.norm.logpdf(blocks["mu"], 0.0, priors.alpha_sd).sum()
            + (scipy.stats.halfnorm.logpdf(sigma, scale=priors.tau_scale) + blocks["log_sigma"]).sum()
            + scipy.stats.norm.logpdf(blocks["beta_raw"]).sum()
        )
        empty = Panel.empty(model.dims, grid=tiny_panel.grid)
        assert Posterior(model, empty).log_posterior(state).value == pytest.approx(expected, rel=1e-10)

    def test_sign_flip_invariance(self, model, tiny_panel):
        posterior = Posterior(model, tiny_panel)
        state = model.initial_state(np.random.default_rng(5))
        flipped = state.replace(innovations=-state["innovations"], omega_raw=-state["omega_raw"])
        assert posterior.log_posterior(flipped).value == pytest.approx(posterior.log_posterior(state).value, rel=1e-12)

    def test_rejects_mismatched_panel(self, model, tiny_panel):
        with pytest.raises(ConsistencyError):
            Posterior(model, tiny_panel.split(1)[0])

    def test_rejects_panel_with_other_brand_layout(self, model, tiny_panel):
        first = tiny_panel.dims.categories[0]
        rebased = replace(first, baseline=1)
        other = replace(tiny_panel, dims=replace(tiny_panel.dims, categories=(rebased, *tiny_panel.dims.categories[1:])))
        assert (other.dims.I, other.dims.K, other.dims.T) == (tiny_panel.dims.I, tiny_panel.dims.K, tiny_panel.dims.T)

        with pytest.raises(ConsistencyError):
            Posterior(model, other)

    def test_accepts_model_with_factors(self, tiny_panel):
        Posterior(McdhModel(tiny_panel.dims.with_factors(3), grid=tiny_panel.grid), tiny_panel)

    def test_rejects_foreign_state(self, model, tiny_panel):
        other = McdhModel(tiny_panel.dims.with_factors(2), grid=tiny_panel.grid)
        with pytest.raises(ConsistencyError):
            Posterior(model, tiny_panel).log_posterior(ParameterState.zeros(other.layout))

    def test_finite_flag(self, model, tiny_panel):
        assert Posterior(model, tiny_panel).log_posterior(ParameterState.zeros(model.layout)).is_finite


def test_log_posterior_reads_factor_count(model, tiny_panel):
    state = model.initial_state(np.random.default_rng(6))
    assert log_posterior(state, tiny_panel).value == pytest.approx(Posterior(model, tiny_panel).log_posterior(state).value, rel=1e-12)
