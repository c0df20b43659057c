import math

import numpy as np
import pytest

from mcdh.errors import ConsistencyError, InvalidArgumentError
from mcdh.gp import TimeGrid, SEKernelParams, build_covariance
from mcdh.model import McdhModel, LatentFactorSet, ParameterState, realize_factors, assemble_sensitivity, compose_sigma_omega
from mcdh.model.core import assemble_all


class TestRealizeFactors:
    def test_zero_innovations(self):
        factors = realize_factors(np.zeros((2, 5)), np.array([1.0, 3.0]), TimeGrid.from_buckets(5))
        assert np.all(factors.realized == 0)

    def test_single_bucket(self):
        factors = realize_factors(np.array([[1.7]]), np.array([2.0]), TimeGrid.from_buckets(1))
        assert factors.realized[0, 0] == pytest.approx(math.sqrt(1 + 1e-8) * 1.7, rel=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            realize_factors(np.zeros((2, 4)), np.array([1.0]), TimeGrid.from_buckets(4))

    def test_monte_carlo_covariance(self):
        grid = TimeGrid.from_buckets(5)
        innovations = np.random.default_rng(0).standard_normal((10_000, 5))
        realized = realize_factors(innovations, np.full(len(innovations), 2.0), grid).realized
        expected = build_covariance(grid, SEKernelParams(1.0, 2.0)).entries

        sample = np.cov(realized, rowvar=False)
        assert np.max(np.abs(sample - expected)) < 0.08

    def test_no_factors(self):
        assert realize_factors(np.zeros((0, 3)), np.zeros(0), TimeGrid.from_buckets(3)).realized.shape == (0, 3)


class TestAssembleSensitivity:
    @pytest.fixture
    def factors(self):
        realized = np.array([[1.0, 0.5, -1.0], [3.0, 3.0, 2.0]])
        return LatentFactorSet(innovations=realized, length_scales=np.array([1.0, 2.0]), realized=realized)

    def test_zero_weights(self, factors):
        path = assemble_sensitivity(0, 1, np.array([0.2, -0.7]), np.zeros((1, 2, 2)), factors)
        assert path.values.tolist() == [-0.7, -0.7, -0.7]

    def test_identity_weights(self, factors):
        omega = np.zeros((1, 1, 2))
        omega[0, 0, 0] = 1.0
        assert np.array_equal(assemble_sensitivity(0, 0, np.zeros(1), omega, factors).values, factors.realized[0])

    def test_hand_arithmetic(self, factors):
        omega = np.array([[[2.0, -1.0]]])
        assert assemble_sensitivity(0, 0, np.array([0.5]), omega, factors).values[0] == pytest.approx(-0.5)

    def test_linear_in_weights(self, factors):
        rng = np.random.default_rng(2)
        alpha, omega = rng.normal(size=3), rng.normal(size=(2, 3, 2))
        base = assemble_sensitivity(1, 2, alpha, omega, factors).values - alpha[2]
        scaled = assemble_sensitivity(1, 2, alpha, 3.5 * omega, factors).values - alpha[2]
        assert np.allclose(scaled, 3.5 * base, rtol=1e-12)

    def test_sign_flip(self, factors):
        rng = np.random.default_rng(3)
        alpha, omega = rng.normal(size=2), rng.normal(size=(2, 2, 2))
        flipped_omega = omega.copy()
        flipped_omega[:, :, 1] *= -1

        original = assemble_all(alpha, omega, factors.realized)
        flipped = assemble_all(alpha, flipped_omega, factors.flipped(1).realized)
        assert np.array_equal(original, flipped)

    def test_out_of_range(self, factors):
        with pytest.raises(ConsistencyError):
            assemble_sensitivity(4, 0, np.zeros(1), np.zeros((1, 1, 2)), factors)

    def test_matches_assemble_all(self, factors):
        rng = np.random.default_rng(4)
        alpha, omega = rng.normal(size=3), rng.normal(size=(2, 3, 2))
        assert np.allclose(assemble_all(alpha, omega, factors.realized)[1, 2], assemble_sensitivity(1, 2, alpha, omega, factors).values)


class TestComposeSigmaOmega:
    def test_identity(self):
        assert np.array_equal(compose_sigma_omega(np.ones(3), np.eye(3)), np.eye(3))

    def test_hand_multiplication(self):
        assert np.allclose(compose_sigma_omega(np.array([2.0, 3.0]), np.array([[1.0, 0.5], [0.5, 1.0]])), [[4.0, 3.0], [3.0, 9.0]])

    def test_diagonal_and_positive_definite(self):
        tau = np.array([0.5, 1.2, 2.0])
        corr = np.array([[1.0, 0.3, -0.2], [0.3, 1.0, 0.4], [-0.2, 0.4, 1.0]])
        sigma = compose_sigma_omega(tau, corr)
        assert np.allclose(np.diag(sigma), tau**2)
        np.linalg.cholesky(sigma)

    def test_rejects_non_positive_scale(self):
        with pytest.raises(InvalidArgumentError):
            compose_sigma_omega(np.array([1.0, 0.0]), np.eye(2))


class TestMcdhModel:
    @pytest.fixture
    def model(self, tiny_panel):
        return McdhModel(tiny_panel.dims, grid=tiny_panel.grid)

    def test_layout(self, model):
        dims = model.dims
        assert [block.name for block in model.layout] == ["innovations", "log_length_scales", "alpha", "omega_raw", "log_tau", "corr_unconstrained"]
        assert model.layout.size == dims.L * dims.T + dims.L + dims.K + dims.I * dims.K * dims.L + dims.K + dims.K * (dims.K - 1) // 2

    def test_constrain_at_zero(self, model):
        constrained = model.constrain(ParameterState.zeros(model.layout))
        assert np.allclose(constrained["tau"], 1.0)
        assert np.allclose(constrained["corr"], np.eye(model.dims.K), atol=1e-15)
        assert constrained["beta"].shape == (model.dims.I, model.dims.K, model.dims.T)

    def test_round_trip(self, model):
        rng = np.random.default_rng(6)
        for _ in range(3):
            state = model.initial_state(rng)
            assert np.allclose(model.unconstrain(model.constrain(state)).vector, state.vector, atol=1e-8)

    def test_beta_follows_factors(self, model):
        constrained = model.constrain(model.initial_state(np.random.default_rng(7)))
        expected = assemble_all(constrained["alpha"], constrained["omega"], constrained["factors"])
        assert np.allclose(constrained["beta"], expected, atol=1e-12)

    def test_sigma_omega(self, model):
        constrained = model.constrain(model.initial_state(np.random.default_rng(8)))
        assert np.allclose(constrained["sigma_omega"], compose_sigma_omega(constrained["tau"], constrained["corr"]), atol=1e-12)

    def test_zero_factors_pool(self, tiny_panel):
        model = McdhModel(tiny_panel.dims.with_factors(0), grid=tiny_panel.grid)
        constrained = model.constrain(model.initial_state(np.random.default_rng(9)))
        assert np.allclose(constrained["beta"], constrained["alpha"][None, :, None])

    def test_extrapolate_shape(self, model):
        constrained = model.constrain(model.initial_state(np.random.default_rng(10)))
        future = model.extrapolate(constrained, np.array([4.0, 5.0]), np.random.default_rng(0))
        assert future.shape == (model.dims.I, model.dims.K, 2)

    def test_rejects_foreign_state(self, model, tiny_panel):
        other = McdhModel(tiny_panel.dims.with_factors(2), grid=tiny_panel.grid)
        with pytest.raises(InvalidArgumentError):
            model.constrain(ParameterState.zeros(other.layout))
