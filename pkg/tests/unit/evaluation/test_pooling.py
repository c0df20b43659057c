import numpy as np
import pytest

from mcdh.errors import InvalidArgumentError
from mcdh.evaluation import pooling_metric, posterior_pooling
from mcdh.model import LogitInfoModel, LogitModel

INDEX_MAP = [np.array([0, 1]), np.array([2, 3])]


class TestPoolingMetric:
    def test_identity(self):
        assert pooling_metric(np.eye(4), INDEX_MAP).tolist() == [0.0, 0.0]

    def test_constant(self):
        corr = np.full((4, 4), -0.3)
        np.fill_diagonal(corr, 1.0)
        assert pooling_metric(corr, INDEX_MAP) == pytest.approx([0.3, 0.3])

    def test_worked_example(self):
        corr = np.eye(4)
        corr[0, 2] = corr[2, 0] = 0.5
        corr[1, 3] = corr[3, 1] = -0.5
        assert pooling_metric(corr, INDEX_MAP) == pytest.approx([0.25, 0.25])

    def test_ignores_within_category(self):
        corr = np.eye(4)
        corr[0, 1] = corr[1, 0] = 0.9
        assert pooling_metric(corr, INDEX_MAP).tolist() == [0.0, 0.0]

    def test_single_category(self):
        assert np.isnan(pooling_metric(np.eye(2), [np.array([0, 1])])).all()

    def test_rejects_bad_partition(self):
        with pytest.raises(InvalidArgumentError):
            pooling_metric(np.eye(4), [np.array([0, 1]), np.array([1, 2])])


class TestPosteriorPooling:
    def test_frame(self, split_panel, make_draws):
        train, _ = split_panel
        model = LogitInfoModel(train.dims, grid=train.grid)
        frame = posterior_pooling(make_draws(model), model)

        assert frame["category"].tolist() == [0, 1]
        assert np.all((frame["pooling_lower"] <= frame["pooling_median"]) & (frame["pooling_median"] <= frame["pooling_upper"]))
        assert np.all((frame["pooling_median"] >= 0) & (frame["pooling_median"] <= 1))

    def test_needs_correlation(self, split_panel, make_draws):
        train, _ = split_panel
        model = LogitModel(train.dims, grid=train.grid)
        with pytest.raises(InvalidArgumentError):
            posterior_pooling(make_draws(model), model)
