import math

import numpy as np
import pytest
import jax.numpy as jnp

from mcdh.errors import InvalidArgumentError
from mcdh.model import lkj_log_density_unnormalized, half_normal_log_density
from mcdh.model.transforms import corr_cholesky_from_unconstrained, unconstrained_from_corr, n_partial_correlations


class TestLkjLogDensity:
    def test_identity(self):
        assert lkj_log_density_unnormalized(np.eye(4), 2.0) == pytest.approx(0.0, abs=1e-15)

    def test_two_by_two(self):
        assert lkj_log_density_unnormalized(np.array([[1.0, 0.6], [0.6, 1.0]]), 2.0) == pytest.approx(math.log(0.64), rel=1e-12)

    def test_uniform_shape(self):
        assert lkj_log_density_unnormalized(np.array([[1.0, -0.3], [-0.3, 1.0]]), 1.0) == 0.0

    def test_invalid_shape(self):
        with pytest.raises(InvalidArgumentError):
            lkj_log_density_unnormalized(np.eye(2), 0.0)


class TestHalfNormalLogDensity:
    def test_at_zero(self):
        assert half_normal_log_density(1e-300) == pytest.approx(math.log(math.sqrt(2 / math.pi)), rel=1e-12)

    def test_at_one(self):
        assert half_normal_log_density(1.0) == pytest.approx(math.log(math.sqrt(2 / math.pi)) - 0.5, rel=1e-12)

    def test_ratio(self):
        for x in (0.1, 0.8, 2.5):
            assert math.exp(half_normal_log_density(x) - half_normal_log_density(1e-300)) == pytest.approx(math.exp(-x**2 / 2), rel=1e-12)


class TestCorrelationTransform:
    def test_zero_is_identity(self):
        factor, log_jacobian = corr_cholesky_from_unconstrained(jnp.zeros(n_partial_correlations(4)), 4)
        assert np.allclose(np.asarray(factor), np.eye(4))
        assert float(log_jacobian) == pytest.approx(0.0)

    def test_valid_correlation(self):
        y = np.random.default_rng(0).normal(scale=2.0, size=n_partial_correlations(5))
        factor = np.asarray(corr_cholesky_from_unconstrained(jnp.asarray(y), 5)[0])
        corr = factor @ factor.T
        assert np.allclose(np.diag(corr), 1.0, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(corr) > 0)

    def test_inverse(self):
        y = np.random.default_rng(1).normal(size=n_partial_correlations(4))
        factor = np.asarray(corr_cholesky_from_unconstrained(jnp.asarray(y), 4)[0])
        assert np.allclose(unconstrained_from_corr(factor @ factor.T), y, atol=1e-10)

    def test_single_coefficient(self):
        factor, log_jacobian = corr_cholesky_from_unconstrained(jnp.zeros(0), 1)
        assert np.asarray(factor).tolist() == [[1.0]] and float(log_jacobian) == 0.0
