import numpy as np
import pytest

import mcdh  # noqa: F401  enables float64 in jax before any test builds an array
from mcdh.config import SamplerConfig
from mcdh.gp import TimeGrid
from mcdh.model import CategoryLayout, ModelDims, ChoiceObservation, Panel
from mcdh.simulation import SimConfig, simulate


@pytest.fixture
def tiny_config():
    return SimConfig(individuals=3, brands=(2, 3), time_buckets=4, choices_per_period=2, length_scales=(2.0,), seed=11)


@pytest.fixture
def tiny_sim(tiny_config):
    return simulate(tiny_config)


@pytest.fixture
def tiny_panel(tiny_sim):
    return tiny_sim.panel


@pytest.fixture(scope="session")
def gradient_panel():
    """Five individuals, two categories of three brands, four buckets: large enough to exercise every gradient path."""
    return simulate(SimConfig(individuals=5, brands=(3, 3), time_buckets=4, choices_per_period=3, length_scales=(2.0, 6.0), seed=29)).panel


@pytest.fixture
def fast_sampler():
    return SamplerConfig(chains=2, warmup=40, samples=20, max_tree_depth=5, seed=3)


@pytest.fixture
def two_brand_dims():
    return ModelDims(individuals=1, categories=(CategoryLayout(name="cola", brands=("a", "b")),), time_buckets=1)


@pytest.fixture
def two_brand_panel(two_brand_dims):
    layout = two_brand_dims.categories[0]
    features = np.stack([layout.design_row(brand, 0.0) for brand in range(2)])
    observation = ChoiceObservation(individual=0, category=0, time_bucket=0, features=features, chosen=1, occasion="o1")
    return Panel.from_observations([observation], dims=two_brand_dims, grid=TimeGrid.from_buckets(1))


@pytest.fixture
def split_panel(tiny_panel):
    return tiny_panel.split(2)


@pytest.fixture
def make_draws():
    """Draws of a model filled with random initial states, for tests that need a posterior without running the sampler."""
    from mcdh.inference import PosteriorDraws

    def build(model, chains=2, samples=3, seed=0, radius=0.5, repeat=False):
        rng = np.random.default_rng(seed)
        if repeat:
            values = np.tile(model.initial_state(rng, radius=radius).vector, (chains, samples, 1))
        else:
            values = np.stack([[model.initial_state(rng, radius=radius).vector for _ in range(samples)] for _ in range(chains)])
        return PosteriorDraws(values=values, layout=model.layout, stats={}, seed=seed, model_kind=model.kind.value)

    return build
