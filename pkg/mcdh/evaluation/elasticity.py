"""Dynamic own-price elasticities of the multinomial logit, per posterior draw and summarized."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from mcdh.config import ForecastConfig
from mcdh.errors import ConsistencyError, InvalidArgumentError
from mcdh.frame import Frame
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.base import ChoiceModel
from mcdh.model.choice import Panel, choice_probabilities
from .posterior_draws import iter_constrained, summarize

logger = logging.getLogger(__name__)


def elasticity(beta_price: Any, price: Any, prob: Any) -> np.ndarray:
    """beta_price * price * (1 - prob): percent change of a choice probability per percent change of the alternative's own price."""
    prob = np.asarray(prob, dtype=np.float64)
    if np.any((prob < 0) | (prob > 1)) or not np.all(np.isfinite(prob)):
        raise InvalidArgumentError("Choice probabilities must lie in [0, 1].")

    return np.asarray(beta_price, dtype=np.float64) * np.asarray(price, dtype=np.float64) * (1.0 - prob)


@dataclass(eq=False)
class ElasticityReport:
    """
    Elasticity summaries per (individual, category, brand, time) and averaged over individuals per (category, brand, time).
    Price slopes are divided by the category's training price SD so the elasticities refer to raw prices.
    """
    model_kind: str
    individual: Frame = field(repr=False)
    category: Frame = field(repr=False)
    price_scale: tuple[float, ...] = ()
    interval: float = 0.9
    n_draws: int = 0

    def tables(self) -> dict[str, Frame]:
        return {"elasticity_individual": self.individual, "elasticity_category": self.category}

    def summary(self) -> dict[str, Any]:
        return {
            "model": self.model_kind,
            "n_draws": self.n_draws,
            "interval": self.interval,
            "price_scale": list(self.price_scale),
            "note": "price coefficients are rescaled by the training price SD of each category, elasticities refer to raw prices",
        }


def training_window(panel: Panel, time_buckets: int) -> Panel:
    """The occasions of the first 'time_buckets' buckets, with dimensions and grid shortened to match."""
    if not 0 < time_buckets <= panel.dims.T:
        raise ConsistencyError(f"Cannot restrict {panel!r} to its first {time_buckets} time bucket(s).")

    return replace(panel.select_times(0, time_buckets), dims=panel.dims.with_time_buckets(time_buckets), grid=panel.grid.head(time_buckets))


def representative_prices(panel: Panel) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Per category, the mean raw price (J, T) and mean extra features (J, T, E) of each brand in each bucket.
    Buckets without occasions fall back to the brand's overall mean.
    """
    results = []
    for block, layout, location, scale in zip(panel.blocks, panel.dims.categories, panel.price_location, panel.price_scale):
        T, J, position = panel.dims.T, layout.n_brands, layout.price_position
        raw = block.features[:, :, position] * scale + location
        extras = block.features[:, :, position + 1:]

        prices = np.full((J, T), float(raw.mean()) if raw.size else location)
        mean_extras = np.zeros((J, T, extras.shape[2]))
        overall_price = raw.mean(axis=0) if len(block) else np.full(J, location)
        overall_extras = extras.mean(axis=0) if len(block) else np.zeros((J, extras.shape[2]))

        for t in range(T):
            members = block.time == t
            prices[:, t] = raw[members].mean(axis=0) if members.any() else overall_price
            mean_extras[:, t] = extras[members].mean(axis=0) if members.any() else overall_extras

        results.append((prices, mean_extras))

    return results


def elasticity_draws(constrained: dict[str, np.ndarray], panel: Panel, prices: Sequence[tuple[np.ndarray, np.ndarray]]) -> list[np.ndarray]:
    """Elasticities (I, J, T) per category under one posterior draw, at the representative prices."""
    beta, dims = constrained["beta"], panel.dims
    results = []

    for category, (layout, (raw_prices, extras)) in enumerate(zip(dims.categories, prices)):
        location, scale = panel.price_location[category], panel.price_scale[category]
        position = layout.price_position
        J, T = raw_prices.shape

        features = np.zeros((J, T, layout.n_coefficients))
        for index, brand in enumerate(layout.dummy_brands):
            features[brand, :, index] = 1.0
        features[:, :, position] = (raw_prices - location) / scale
        features[:, :, position + 1:] = extras

        coefficients = beta[:, dims.category_index_map[category], :T]
        probs = choice_probabilities(np.einsum("jtp,ipt->ijt", features, coefficients), axis=1)
        slope = coefficients[:, position, :] / scale
        results.append(elasticity(slope[:, None, :], raw_prices[None, :, :], probs))

    return results


def elasticity_report(draws: PosteriorDraws, model: ChoiceModel, panel: Panel, config: Optional[ForecastConfig] = None) -> ElasticityReport:
    """Summarize elasticities over at most config.max_draws evenly spaced draws on the training grid of 'model'."""
    config = config if config is not None else ForecastConfig()
    if panel.dims.T != model.dims.T:
        panel = training_window(panel, model.dims.T)

    prices = representative_prices(panel)
    samples = [[] for _ in panel.dims.categories]
    for constrained in iter_constrained(draws, model, config.max_draws):
        for store, values in zip(samples, elasticity_draws(constrained, panel, prices)):
            store.append(values)

    if not samples[0]:
        raise InvalidArgumentError("There are no posterior draws to compute elasticities from.")

    individual_frames, category_frames = [], []
    for category, (layout, values) in enumerate(zip(panel.dims.categories, samples)):
        values = np.asarray(values)
        I, J, T = values.shape[1:]

        median, lower, upper = summarize(values, config.interval)
        individual, brand, time = (axis.reshape(-1) for axis in np.meshgrid(np.arange(I), np.arange(J), np.arange(T), indexing="ij"))
        individual_frames.append(pd.DataFrame({
            "individual": individual, "individual_id": [panel.individual_ids[index] for index in individual],
            "category": category, "category_name": layout.name, "brand": brand, "brand_name": [layout.brands[index] for index in brand],
            "time_bucket": time, "price": prices[category][0][brand, time],
            "median": median.reshape(-1), "lower": lower.reshape(-1), "upper": upper.reshape(-1),
        }))

        category_median, category_lower, category_upper = summarize(values.mean(axis=1), config.interval)
        brand, time = (axis.reshape(-1) for axis in np.meshgrid(np.arange(J), np.arange(T), indexing="ij"))
        category_frames.append(pd.DataFrame({
            "model": model.kind.value, "category": category, "category_name": layout.name, "brand": brand, "brand_name": [layout.brands[index] for index in brand],
            "time_bucket": time, "median": category_median.reshape(-1), "lower": category_lower.reshape(-1), "upper": category_upper.reshape(-1),
        }))

    report = ElasticityReport(
        model_kind=model.kind.value, individual=Frame(pd.concat(individual_frames, ignore_index=True)), category=Frame(pd.concat(category_frames, ignore_index=True)),
        price_scale=tuple(panel.price_scale), interval=config.interval, n_draws=len(samples[0]),
    )

    logger.info(f"Summarized elasticities of the '{report.model_kind}' model over {report.n_draws} draw(s).")
    return report


def category_elasticity_series(draws: PosteriorDraws, model: ChoiceModel, panel: Panel, config: Optional[ForecastConfig] = None) -> Frame:
    """Elasticity per (category, brand, time) averaged over individuals, labeled with the model kind for cross-model comparison."""
    return elasticity_report(draws, model, panel, config=config).category
