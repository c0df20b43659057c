import numpy as np
import pytest

from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError
from mcdh.model import (
    BenchmarkSpec, ArmaMeanParams, arma_mean_recursion, BENCHMARK_KINDS, ChoiceModel, McdhModel, LogitInfoModel, OffsetsInfoModel, GpdhModel,
    Posterior, ParameterState, benchmark_log_posterior,
)
from mcdh.harness.pipeline import build_model
from .test_posterior import assert_gradient_matches, finite_difference_gradient


class TestArmaMeanRecursion:
    def test_constant(self):
        params = ArmaMeanParams(alpha0=[1.3], alpha1=[0.0], alpha2=[0.0], innovation_sd=[1.0], innovations=np.zeros((1, 5)))
        assert np.allclose(arma_mean_recursion(params, 5), 1.3)

    def test_hand_recursion(self):
        params = ArmaMeanParams(alpha0=[1.0], alpha1=[0.5], alpha2=[0.0], innovation_sd=[1.0], innovations=np.zeros((1, 4)))
        assert np.allclose(arma_mean_recursion(params, 4, initial=np.array([0.0]))[0], [0.0, 1.0, 1.5, 1.75])

    def test_moving_average_term(self):
        zeta = np.random.default_rng(0).normal(size=(2, 6))
        params = ArmaMeanParams(alpha0=[0.4, -1.0], alpha1=[0.0, 0.0], alpha2=[1.0, 1.0], innovation_sd=[1.0, 1.0], innovations=zeta)
        means = arma_mean_recursion(params, 6)
        assert np.allclose(means[:, 1:] - params.alpha0[:, None], zeta[:, 1:] + zeta[:, :-1], atol=1e-14)

    def test_stationary_start(self):
        params = ArmaMeanParams(alpha0=[1.0], alpha1=[0.5], alpha2=[0.0], innovation_sd=[1.0], innovations=np.zeros((1, 3)))
        assert np.allclose(arma_mean_recursion(params, 3), 2.0)

    def test_too_few_innovations(self):
        params = ArmaMeanParams(alpha0=[0.0], alpha1=[0.0], alpha2=[0.0], innovation_sd=[1.0], innovations=np.zeros((1, 2)))
        with pytest.raises(InvalidArgumentError):
            arma_mean_recursion(params, 3)

    def test_rejects_non_positive_sd(self):
        with pytest.raises(InvalidArgumentError):
            ArmaMeanParams(alpha0=[0.0], alpha1=[0.0], alpha2=[0.0], innovation_sd=[0.0], innovations=np.zeros((1, 2)))


class TestBenchmarkSpec:
    def test_rejects_mcdh(self):
        with pytest.raises(InvalidArgumentError):
            BenchmarkSpec(Enums.ModelKind.MCDH)

    @pytest.mark.parametrize("kind", BENCHMARK_KINDS)
    def test_builds_registered_model(self, kind, tiny_panel):
        model = BenchmarkSpec(kind).build(tiny_panel.dims, grid=tiny_panel.grid)
        assert model.kind == kind and isinstance(model, ChoiceModel)


@pytest.mark.parametrize("kind", BENCHMARK_KINDS)
def test_gradient_matches_finite_differences(kind, tiny_panel):
    model = BenchmarkSpec(kind).build(tiny_panel.dims, grid=tiny_panel.grid)
    posterior = Posterior(model, tiny_panel)
    vector = model.initial_state(np.random.default_rng(1), radius=0.5).vector

    _, gradient = posterior(vector)
    numeric = finite_difference_gradient(posterior, vector)
    assert np.linalg.norm(gradient - numeric) <= 1e-5 * np.linalg.norm(gradient)


@pytest.mark.parametrize("kind", BENCHMARK_KINDS)
def test_gradient_at_random_points(kind, gradient_panel):
    assert_gradient_matches(build_model(kind, gradient_panel), gradient_panel, seed=1)


@pytest.mark.parametrize("kind", BENCHMARK_KINDS)
def test_beta_shape(kind, tiny_panel):
    model = BenchmarkSpec(kind).build(tiny_panel.dims, grid=tiny_panel.grid)
    constrained = model.constrain(model.initial_state(np.random.default_rng(2)))
    assert constrained["beta"].shape == (tiny_panel.dims.I, tiny_panel.dims.K, tiny_panel.dims.T)

    future = model.extrapolate(constrained, np.array([4.0, 5.0]), np.random.default_rng(3))
    assert future.shape == (tiny_panel.dims.I, tiny_panel.dims.K, 2)


def test_logit_is_static(tiny_panel):
    model = BenchmarkSpec(Enums.ModelKind.LOGIT).build(tiny_panel.dims, grid=tiny_panel.grid)
    beta = model.constrain(model.initial_state(np.random.default_rng(4)))["beta"]
    assert np.all(beta == beta[:, :, :1])


def test_logit_shares_beta_when_heterogeneity_vanishes(tiny_panel):
    model = BenchmarkSpec(Enums.ModelKind.LOGIT).build(tiny_panel.dims, grid=tiny_panel.grid)
    state = model.initial_state(np.random.default_rng(5)).replace(log_sigma=np.full(model.dims.K, -30.0))
    beta = model.constrain(state)["beta"]
    assert np.allclose(beta, beta[:1], atol=1e-10)


def test_offsets_with_flat_mean_matches_logit_info(tiny_panel):
    offsets = OffsetsInfoModel(tiny_panel.dims, grid=tiny_panel.grid)
    logit = LogitInfoModel(tiny_panel.dims, grid=tiny_panel.grid)
    rng = np.random.default_rng(6)
    shared = logit.initial_state(rng)

    state = ParameterState.from_blocks({
        "mu_level": shared["mu"], "mean_innovations": np.zeros((offsets.dims.K, offsets.dims.T)), "log_gp_amplitude": np.array(0.0),
        "log_gp_length_scale": np.array(0.0), "log_tau": shared["log_tau"], "corr_unconstrained": shared["corr_unconstrained"], "offset_raw": shared["beta_raw"],
    }, offsets.layout)

    assert np.allclose(offsets.constrain(state)["beta"], logit.constrain(shared)["beta"], atol=1e-12)
    assert Posterior(offsets, tiny_panel).log_likelihood(state) == pytest.approx(Posterior(logit, tiny_panel).log_likelihood(shared), abs=1e-8)


def test_mcdh_without_factors_matches_static_likelihood(tiny_panel):
    mcdh = McdhModel(tiny_panel.dims.with_factors(0), grid=tiny_panel.grid)
    logit = LogitInfoModel(tiny_panel.dims.with_factors(0), grid=tiny_panel.grid)
    state = mcdh.initial_state(np.random.default_rng(7))
    static = ParameterState.from_blocks({
        "mu": state["alpha"], "log_tau": state["log_tau"], "corr_unconstrained": state["corr_unconstrained"], "beta_raw": np.zeros((logit.dims.I, logit.dims.K)),
    }, logit.layout)

    assert Posterior(mcdh, tiny_panel).log_likelihood(state) == pytest.approx(Posterior(logit, tiny_panel).log_likelihood(static), abs=1e-10)


def test_gpdh_mean_without_dynamics(tiny_panel):
    model = GpdhModel(tiny_panel.dims, grid=tiny_panel.grid)
    state = model.initial_state(np.random.default_rng(8)).replace(alpha1=np.zeros(model.dims.K), alpha2=np.zeros(model.dims.K))
    constrained = model.constrain(state)
    expected = state["alpha0"][:, None] + np.exp(state["log_tau"])[:, None] * state["zeta_raw"]
    assert np.allclose(constrained["mean_path"], expected, atol=1e-12)


def test_benchmark_log_posterior(tiny_panel):
    spec = BenchmarkSpec(Enums.ModelKind.LOGIT)
    model = spec.build(tiny_panel.dims, grid=tiny_panel.grid)
    state = model.initial_state(np.random.default_rng(9))
    assert benchmark_log_posterior(spec, state, tiny_panel).value == pytest.approx(Posterior(model, tiny_panel).log_posterior(state).value, rel=1e-12)
