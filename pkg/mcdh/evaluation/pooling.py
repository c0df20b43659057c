from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from mcdh.config import ForecastConfig
from mcdh.errors import InvalidArgumentError
from mcdh.frame import Frame
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.base import ChoiceModel
from .posterior_draws import iter_constrained, summarize


def pooling_metric(corr: np.ndarray, category_index_map: Sequence[np.ndarray]) -> np.ndarray:
    """
    Magnitude of cross-category pooling of each category: the mean over its coefficients of the mean absolute correlation
    with every coefficient of the other categories. NaN for a category when there is no other category.
    """
    corr = np.asarray(corr, dtype=np.float64)
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise InvalidArgumentError(f"A correlation matrix must be square, got shape {corr.shape}.")

    members = [np.asarray(indices, dtype=np.int64) for indices in category_index_map]
    if sorted(np.concatenate(members).tolist()) != list(range(corr.shape[0])):
        raise InvalidArgumentError(f"The category index map must partition the {corr.shape[0]} coefficients.")

    pooling = np.full(len(members), np.nan)
    for category, own in enumerate(members):
        others = np.concatenate([indices for index, indices in enumerate(members) if index != category]) if len(members) > 1 else np.zeros(0, dtype=np.int64)
        if len(own) and len(others):
            pooling[category] = np.abs(corr[np.ix_(own, others)]).mean(axis=1).mean()

    return pooling


def posterior_pooling(draws: PosteriorDraws, model: ChoiceModel, config: Optional[ForecastConfig] = None) -> Frame:
    """Posterior median and central interval of every category's pooling magnitude."""
    config = config if config is not None else ForecastConfig()
    index_map = model.dims.category_index_map

    samples = []
    for constrained in iter_constrained(draws, model, config.max_draws):
        if (corr := model.heterogeneity_correlation(constrained)) is None:
            raise InvalidArgumentError(f"{model!r} does not estimate a heterogeneity correlation matrix.")
        samples.append(pooling_metric(corr, index_map))

    median, lower, upper = summarize(np.asarray(samples), config.interval)
    return Frame({
        "category": np.arange(model.dims.C), "category_name": [layout.name for layout in model.dims.categories],
        "pooling_median": median, "pooling_lower": lower, "pooling_upper": upper,
    })
