from dataclasses import replace

import numpy as np
import pytest

from mcdh.config import ForecastConfig
from mcdh.errors import ConsistencyError, UnscoreableIndividualError
from mcdh.evaluation import forecast, predictive_probabilities
from mcdh.model import LogitModel, McdhModel, GpdhModel, choice_probabilities


@pytest.fixture
def mcdh_setup(split_panel, make_draws):
    train, holdout = split_panel
    model = McdhModel(train.dims, grid=train.grid)
    return model, make_draws(model), train, holdout


class TestPredictiveProbabilities:
    def test_rows_are_distributions(self, mcdh_setup):
        model, draws, _, holdout = mcdh_setup
        probabilities, used = predictive_probabilities(draws, model, holdout)

        assert used == 6
        assert [probs.shape for probs in probabilities] == [(12, 2), (12, 3)]
        assert all(np.allclose(probs.sum(axis=1), 1.0) for probs in probabilities)

    def test_deterministic_given_seed(self, mcdh_setup):
        model, draws, _, holdout = mcdh_setup
        first, _ = predictive_probabilities(draws, model, holdout, seed=4)
        second, _ = predictive_probabilities(draws, model, holdout, seed=4)
        assert all(np.array_equal(a, b) for a, b in zip(first, second))

    def test_static_model_uses_its_own_sensitivities(self, split_panel, make_draws):
        train, holdout = split_panel
        model = LogitModel(train.dims, grid=train.grid)
        draws = make_draws(model, repeat=True)
        beta_static = model.constrain(draws.state(0, 0))["beta_static"]

        probabilities, _ = predictive_probabilities(draws, model, holdout)
        block = holdout.blocks[1]
        coefficients = beta_static[block.individual][:, holdout.dims.category_index_map[1]]
        expected = choice_probabilities(np.einsum("njp,np->nj", block.features, coefficients))
        assert np.allclose(probabilities[1], expected, atol=1e-12)

    def test_max_draws(self, mcdh_setup):
        model, draws, _, holdout = mcdh_setup
        assert predictive_probabilities(draws, model, holdout, max_draws=2)[1] == 2

    def test_rejects_grid_that_does_not_extend_training(self, tiny_panel, split_panel, make_draws):
        train, _ = split_panel
        model = McdhModel(tiny_panel.dims, grid=tiny_panel.grid)
        with pytest.raises(ConsistencyError):
            predictive_probabilities(make_draws(model), model, train)


class TestForecast:
    def test_report(self, mcdh_setup):
        model, draws, train, holdout = mcdh_setup
        report = forecast(draws, holdout, model, training=train, config=ForecastConfig(max_draws=4))

        assert report.n_observations == 24 and report.n_draws == 4
        assert 0.0 <= report.hit_rate <= 1.0
        assert report.by_category["n_observations"].tolist() == [12, 12]
        assert set(report.tables()) == {"forecast_predictions", "forecast_by_category", "forecast_by_individual", "forecast_by_individual_category"}
        assert report.by_individual["n_observations"].sum() == 24

    def test_predictions_are_argmax(self, mcdh_setup):
        model, draws, _, holdout = mcdh_setup
        report = forecast(draws, holdout, model)
        for block, probs in zip(holdout.blocks, report.probabilities):
            rows = report.predictions[report.predictions["category"] == block.category]
            assert rows["predicted"].tolist() == np.argmax(probs, axis=1).tolist()

    def test_hit_rate_matches_confusion(self, mcdh_setup):
        model, draws, _, holdout = mcdh_setup
        report = forecast(draws, holdout, model)
        hits = sum(np.trace(confusion) for confusion in report.confusion)
        assert report.hit_rate == pytest.approx(hits / 24)

    def test_unseen_individual(self, mcdh_setup):
        model, draws, train, holdout = mcdh_setup
        without_first = replace(train, blocks=tuple(block.select(block.individual != 0) for block in train.blocks))
        with pytest.raises(UnscoreableIndividualError):
            forecast(draws, holdout, model, training=without_first)

    def test_gpdh(self, split_panel, make_draws):
        train, holdout = split_panel
        model = GpdhModel(train.dims, grid=train.grid)
        report = forecast(make_draws(model), holdout, model)
        assert report.model_kind == "gpdh" and report.n_observations == 24
