import numpy as np
import pytest

from mcdh.config import SamplerConfig
from mcdh.errors import InitializationError, InvalidArgumentError
from mcdh.inference import Point, leapfrog, kinetic_energy, nuts_draw, run_chains, chain_generators, diagnostics


def standard_normal(vector):
    return -0.5 * float(vector @ vector), -vector


CORRELATED_PRECISION = np.linalg.inv(np.array([[1.0, 0.8], [0.8, 1.0]]))


def correlated_normal(vector):
    """Zero-mean bivariate normal, unit variances and correlation 0.8."""
    scaled = CORRELATED_PRECISION @ vector
    return -0.5 * float(vector @ scaled), -scaled


def logistic_of_uniform(vector):
    """A flat prior on (0, 1) seen through the logit transform: log density log s(x) + log(1 - s(x))."""
    x = vector[0]
    value = -np.logaddexp(0.0, -x) - np.logaddexp(0.0, x)
    return float(value), np.array([1.0 - 2.0 / (1.0 + np.exp(-x))])


class TestLeapfrog:
    def test_zero_gradient(self):
        position, momentum = leapfrog(np.array([1.0, 2.0]), np.array([0.5, -1.0]), 0.1, lambda x: np.zeros(2), inv_mass=np.array([2.0, 1.0]))
        assert np.allclose(position, [1.1, 1.9])
        assert np.array_equal(momentum, [0.5, -1.0])

    def test_reversible(self):
        grad = lambda x: -x
        start, momentum = np.array([0.7]), np.array([-0.3])
        position, new_momentum = leapfrog(start, momentum, 0.05, grad)
        back, back_momentum = leapfrog(position, -new_momentum, 0.05, grad)
        assert np.allclose(back, start, atol=1e-10) and np.allclose(-back_momentum, momentum, atol=1e-10)

    def test_energy_drift(self):
        grad = lambda x: -x
        position, momentum = np.array([1.0]), np.array([0.0])
        start = 0.5 * float(position @ position) + kinetic_energy(momentum, np.ones(1))

        for _ in range(100):
            position, momentum = leapfrog(position, momentum, 0.01, grad)

        assert abs(0.5 * float(position @ position) + kinetic_energy(momentum, np.ones(1)) - start) <= 1e-4


class TestNutsDraw:
    def test_stays_finite(self):
        rng = np.random.default_rng(0)
        point = Point.evaluate(np.zeros(3), standard_normal)
        for _ in range(20):
            point, stats = nuts_draw(point, standard_normal, SamplerConfig(), rng, step_size=0.5)
            assert np.all(np.isfinite(point.position))
            assert 0.0 <= stats.accept_stat <= 1.0 and stats.tree_depth <= SamplerConfig().max_tree_depth

    def test_respects_max_tree_depth(self):
        rng = np.random.default_rng(1)
        point = Point.evaluate(np.zeros(2), standard_normal)
        for _ in range(10):
            point, stats = nuts_draw(point, standard_normal, SamplerConfig(max_tree_depth=2), rng, step_size=0.01)
            assert stats.tree_depth <= 2 and stats.n_leapfrog <= 3

    def test_flags_divergence(self):
        steep = lambda x: (-1e6 * float(x @ x), -2e6 * x)
        _, stats = nuts_draw(Point.evaluate(np.ones(2), steep), steep, SamplerConfig(), np.random.default_rng(2), step_size=10.0)
        assert stats.divergent


class TestRunChains:
    def test_gaussian_target(self):
        draws = run_chains(standard_normal, SamplerConfig(chains=4, warmup=500, samples=1000, seed=42), dimension=2)
        report = diagnostics(draws)

        assert draws.values.shape == (4, 1000, 2)
        assert np.all(np.abs(report.table["mean"].to_numpy()) < 3 * report.table["mcse_mean"].to_numpy())
        assert report.max_rhat < 1.05
        assert report.min_ess_bulk > 400

    def test_correlated_gaussian_target(self):
        draws = run_chains(correlated_normal, SamplerConfig(chains=4, warmup=1000, samples=1000, seed=11), dimension=2)
        report = diagnostics(draws)

        assert np.all(np.abs(report.table["mean"].to_numpy()) < 3 * report.table["mcse_mean"].to_numpy())
        assert report.max_rhat < 1.05
        assert report.divergences == 0
        assert np.corrcoef(draws.pooled().T)[0, 1] == pytest.approx(0.8, abs=0.05)

    def test_deterministic(self):
        config = SamplerConfig(chains=2, warmup=30, samples=20, seed=5)
        assert run_chains(standard_normal, config, dimension=2).identical(run_chains(standard_normal, config, dimension=2))

    def test_independent_of_workers(self):
        config = SamplerConfig(chains=3, warmup=30, samples=20, seed=6)
        serial = run_chains(standard_normal, config, dimension=2)
        threaded = run_chains(standard_normal, SamplerConfig(chains=3, warmup=30, samples=20, seed=6, workers=3), dimension=2)
        assert serial.identical(threaded)

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv("MCDH_WORKERS", "2")
        config = SamplerConfig(chains=2, warmup=30, samples=10, seed=7)
        assert run_chains(standard_normal, config, dimension=1).identical(run_chains(standard_normal, config.with_workers_from_env(), dimension=1))

    def test_adaptation_reaches_target(self):
        draws = run_chains(logistic_of_uniform, SamplerConfig(chains=1, warmup=1000, samples=1000, seed=8), dimension=1)
        assert abs(draws.stats["accept_stat"].mean() - 0.8) <= 0.15

    def test_one_step_hmc(self):
        draws = run_chains(standard_normal, SamplerConfig(chains=2, warmup=200, samples=1000, max_tree_depth=1, seed=9), dimension=1)
        assert np.all(np.isfinite(draws.values))
        assert np.all(draws.stats["tree_depth"] <= 1)
        assert abs(draws.values.mean()) < 0.5

    def test_initial_positions(self):
        config = SamplerConfig(chains=2, warmup=20, samples=5, seed=10)
        with pytest.raises(InvalidArgumentError):
            run_chains(standard_normal, config, dimension=1, initial_positions=[np.zeros(1)])

    def test_non_finite_start(self):
        density = lambda x: (float("nan"), np.zeros_like(x))
        with pytest.raises(InitializationError):
            run_chains(density, SamplerConfig(chains=1, warmup=20, samples=5), dimension=1)

    def test_needs_dimension(self):
        with pytest.raises(InvalidArgumentError):
            run_chains(standard_normal, SamplerConfig(chains=1, warmup=20, samples=5))


def test_chain_generators_are_stable():
    first = [rng.random() for rng in chain_generators(3, 4)]
    assert first == [rng.random() for rng in chain_generators(3, 4)]
    assert first[:2] == [rng.random() for rng in chain_generators(3, 2)]
    assert len(set(first)) == 4
