from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from mcdh.config import ForecastConfig
from mcdh.errors import ConsistencyError, InvalidArgumentError
from mcdh.frame import Frame
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.base import ChoiceModel
from mcdh.model.choice import Panel
from .forecast import ForecastReport
from .pooling import pooling_metric
from .posterior_draws import iter_constrained, summarize


def correlation_summary(draws: PosteriorDraws, model: ChoiceModel, config: Optional[ForecastConfig] = None) -> Frame:
    """Posterior median and central interval of every off-diagonal heterogeneity correlation, flagged when it links two categories."""
    config = config if config is not None else ForecastConfig()

    samples = []
    for constrained in iter_constrained(draws, model, config.max_draws):
        if (corr := model.heterogeneity_correlation(constrained)) is None:
            raise InvalidArgumentError(f"{model!r} does not estimate a heterogeneity correlation matrix.")
        samples.append(corr)

    median, lower, upper = summarize(np.asarray(samples), config.interval)
    names, category = model.dims.coefficient_names, model.dims.coefficient_category
    first, second = np.tril_indices(model.dims.K, k=-1)

    return Frame({
        "coefficient_a": [names[index] for index in second], "coefficient_b": [names[index] for index in first],
        "cross_category": category[second] != category[first],
        "median": median[first, second], "lower": lower[first, second], "upper": upper[first, second],
    })


def sensitivity_summary(draws: PosteriorDraws, model: ChoiceModel, individuals: Optional[Sequence[int]] = None,
                        coefficients: Optional[Sequence[int]] = None, config: Optional[ForecastConfig] = None) -> Frame:
    """Posterior median and central interval of beta_ik(t) on the training grid for the selected individuals and coefficients (all by default)."""
    config = config if config is not None else ForecastConfig()
    individuals = np.arange(model.dims.I) if individuals is None else np.asarray(individuals, dtype=np.int64)
    coefficients = np.arange(model.dims.K) if coefficients is None else np.asarray(coefficients, dtype=np.int64)

    if np.any((individuals < 0) | (individuals >= model.dims.I)) or np.any((coefficients < 0) | (coefficients >= model.dims.K)):
        raise InvalidArgumentError(f"Individuals must lie in [0, {model.dims.I}) and coefficients in [0, {model.dims.K}).")

    samples = np.asarray([constrained["beta"][np.ix_(individuals, coefficients)] for constrained in iter_constrained(draws, model, config.max_draws)])
    median, lower, upper = summarize(samples, config.interval)

    individual, coefficient, time = np.meshgrid(individuals, coefficients, np.arange(model.dims.T), indexing="ij")
    return Frame({
        "individual": individual.reshape(-1), "coefficient": coefficient.reshape(-1),
        "coefficient_name": [model.dims.coefficient_names[index] for index in coefficient.reshape(-1)],
        "time_bucket": time.reshape(-1), "time": model.grid.points[time.reshape(-1)],
        "median": median.reshape(-1), "lower": lower.reshape(-1), "upper": upper.reshape(-1),
    })


@dataclass(eq=False)
class HitRateGap:
    """Hit-rate differences (first model minus second) joined with training observation counts and, when known, the pooling magnitude."""
    first: str
    second: str
    by_category: Frame = field(repr=False)
    by_individual: Frame = field(repr=False)
    by_individual_category: Frame = field(repr=False)

    def tables(self) -> dict[str, Frame]:
        return {"gap_by_category": self.by_category, "gap_by_individual": self.by_individual, "gap_by_individual_category": self.by_individual_category}

    def summary(self) -> dict[str, Any]:
        return {"first": self.first, "second": self.second, "by_category": self.by_category.to_dict(orient="records")}


def _gap(first: pd.DataFrame, second: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    merged = first[[*keys, "n_observations", "hit_rate"]].merge(second[[*keys, "hit_rate"]], on=keys, suffixes=("_first", "_second"), how="outer")
    merged["gap"] = merged["hit_rate_first"] - merged["hit_rate_second"]
    return merged.rename(columns={"n_observations": "n_holdout"})


def hit_rate_gap(first: ForecastReport, second: ForecastReport, training: Panel, pooling: Optional[np.ndarray] = None) -> HitRateGap:
    """
    Per category, individual and (individual, category): first hit rate minus second, with training counts.
    'pooling' (one value per category, as from pooling_metric) is joined to the category table.
    """
    if first.n_observations != second.n_observations or not np.array_equal(first.predictions["occasion"].to_numpy(), second.predictions["occasion"].to_numpy()):
        raise ConsistencyError(f"Reports of '{first.model_kind}' and '{second.model_kind}' were scored on different holdout occasions.")

    counts = training.counts
    by_category = _gap(first.by_category, second.by_category, ["category", "category_name"])
    by_category["n_training"] = counts.sum(axis=0)[by_category["category"].to_numpy()]
    if pooling is not None:
        if len(pooling) != training.dims.C:
            raise InvalidArgumentError(f"Expected one pooling value per category ({training.dims.C}), got {len(pooling)}.")
        by_category["pooling"] = np.asarray(pooling)[by_category["category"].to_numpy()]

    by_individual = _gap(first.by_individual, second.by_individual, ["individual", "individual_id"])
    by_individual["n_training"] = counts.sum(axis=1)[by_individual["individual"].to_numpy()]

    by_individual_category = _gap(first.by_individual_category, second.by_individual_category, ["individual", "individual_id", "category", "category_name"])
    by_individual_category["n_training"] = counts[by_individual_category["individual"].to_numpy(), by_individual_category["category"].to_numpy()]

    return HitRateGap(first=first.model_kind, second=second.model_kind, by_category=Frame(by_category), by_individual=Frame(by_individual), by_individual_category=Frame(by_individual_category))


def posterior_mean_pooling(draws: PosteriorDraws, model: ChoiceModel, config: Optional[ForecastConfig] = None) -> np.ndarray:
    """Pooling magnitude per category of the posterior mean correlation matrix."""
    config = config if config is not None else ForecastConfig()
    correlations = [model.heterogeneity_correlation(constrained) for constrained in iter_constrained(draws, model, config.max_draws)]
    if any(corr is None for corr in correlations):
        raise InvalidArgumentError(f"{model!r} does not estimate a heterogeneity correlation matrix.")

    return pooling_metric(np.mean(correlations, axis=0), model.dims.category_index_map)
