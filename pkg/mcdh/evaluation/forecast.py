from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import pandas as pd

from mcdh.config import ForecastConfig
from mcdh.errors import ConsistencyError, UnscoreableIndividualError
from mcdh.frame import Frame
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.base import ChoiceModel
from mcdh.model.choice import Panel, block_utilities, choice_probabilities
from .metrics import confusion_matrix, macro_metrics, hit_rate
from .posterior_draws import iter_constrained

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ForecastReport:
    """Holdout predictions of one model and their scores per category, per individual and per (individual, category)."""
    model_kind: str
    predictions: Frame = field(repr=False)
    by_category: Frame = field(repr=False)
    by_individual: Frame = field(repr=False)
    by_individual_category: Frame = field(repr=False)
    probabilities: tuple[np.ndarray, ...] = field(repr=False)
    confusion: tuple[np.ndarray, ...] = field(repr=False)
    n_draws: int = 0

    @property
    def n_observations(self) -> int:
        return len(self.predictions.index)

    @property
    def hit_rate(self) -> float:
        return hit_rate(self.predictions["chosen"].to_numpy(), self.predictions["predicted"].to_numpy())

    def tables(self) -> dict[str, Frame]:
        return {
            "forecast_predictions": self.predictions,
            "forecast_by_category": self.by_category,
            "forecast_by_individual": self.by_individual,
            "forecast_by_individual_category": self.by_individual_category,
        }

    def summary(self) -> dict[str, Any]:
        return {
            "model": self.model_kind,
            "n_observations": self.n_observations,
            "n_draws": self.n_draws,
            "hit_rate": self.hit_rate,
            "by_category": self.by_category.to_dict(orient="records"),
        }


def _check_holdout(model: ChoiceModel, holdout: Panel) -> np.ndarray:
    if holdout.dims.I != model.dims.I or holdout.dims.K != model.dims.K:
        raise ConsistencyError(f"Holdout {holdout!r} does not share individuals and coefficients with {model!r}.")
    if holdout.dims.T < model.dims.T or holdout.grid.head(model.dims.T) != model.grid:
        raise ConsistencyError(f"The holdout grid {holdout.grid!r} must extend the training grid {model.grid!r}.")

    return holdout.grid.points[model.dims.T:]


def predictive_probabilities(draws: PosteriorDraws, model: ChoiceModel, holdout: Panel, max_draws: int = 200, seed: int = 0) -> tuple[list[np.ndarray], int]:
    """
    Choice probabilities of every holdout occasion averaged over at most 'max_draws' evenly spaced posterior draws.
    Each draw extends its sensitivities past the training grid with one conditional draw from its own generator.
    Returns one (n, J) array per category and the number of draws used.
    """
    new_times = _check_holdout(model, holdout)
    indices = draws.evenly_spaced(max_draws)
    generators = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(len(indices))]

    totals = [np.zeros((len(block), layout.n_brands)) for block, layout in zip(holdout.blocks, holdout.dims.categories)]
    used = 0
    for constrained, rng in zip(iter_constrained(draws, model, max_draws), generators):
        beta = constrained["beta"]
        if len(new_times):
            beta = np.concatenate([beta, model.extrapolate(constrained, new_times, rng)], axis=2)

        for total, block in zip(totals, holdout.blocks):
            if len(block):
                total += choice_probabilities(block_utilities(holdout, block, beta))
        used += 1

    if not used:
        raise ConsistencyError("There are no posterior draws to forecast with.")

    return [total / used for total in totals], used


def forecast(draws: PosteriorDraws, holdout: Panel, model: ChoiceModel, training: Optional[Panel] = None, config: Optional[ForecastConfig] = None, seed: int = 0) -> ForecastReport:
    """
    Predict each holdout occasion as the argmax (lowest brand index on ties) of its draw-averaged probabilities and score
    the predictions. With 'training' given, holdout individuals that have no training occasion raise UnscoreableIndividualError.
    """
    config = config if config is not None else ForecastConfig()
    active = np.unique(np.concatenate([block.individual for block in holdout.blocks]))

    if training is not None:
        seen = training.counts.sum(axis=1) > 0
        if (unseen := [holdout.individual_ids[index] for index in active if not seen[index]]):
            raise UnscoreableIndividualError(f"Holdout individual(s) {unseen[:10]}{' ...' if len(unseen) > 10 else ''} have no training occasions and cannot be scored.")

    probabilities, used = predictive_probabilities(draws, model, holdout, max_draws=config.max_draws, seed=seed)
    kind = model.kind.value

    records, category_rows, confusions = [], [], []
    for block, layout, probs in zip(holdout.blocks, holdout.dims.categories, probabilities):
        predicted = np.argmax(probs, axis=1) if len(block) else np.zeros(0, dtype=np.int64)
        confusion = confusion_matrix(block.chosen, predicted, layout.n_brands)
        metrics = macro_metrics(confusion)
        confusions.append(confusion)

        category_rows.append({
            "category": block.category, "category_name": layout.name, "model": kind, "n_observations": len(block),
            "hit_rate": hit_rate(block.chosen, predicted), "macro_precision": metrics.precision, "macro_recall": metrics.recall, "macro_specificity": metrics.specificity,
        })

        rows = np.arange(len(block))
        records.append(pd.DataFrame({
            "individual": block.individual, "individual_id": [holdout.individual_ids[index] for index in block.individual],
            "category": block.category, "category_name": layout.name, "time_bucket": block.time, "occasion": block.occasion,
            "chosen": block.chosen, "predicted": predicted,
            "prob_chosen": probs[rows, block.chosen] if len(block) else np.zeros(0), "prob_predicted": probs[rows, predicted] if len(block) else np.zeros(0),
        }))

    predictions = Frame(pd.concat(records, ignore_index=True))
    scored = predictions.assign(hit=(predictions["chosen"] == predictions["predicted"]).astype(float), model=kind)

    by_individual = Frame(scored.groupby(["individual", "individual_id", "model"], as_index=False).agg(n_observations=("hit", "size"), hit_rate=("hit", "mean")))
    by_individual_category = Frame(scored.groupby(["individual", "individual_id", "category", "category_name", "model"], as_index=False).agg(n_observations=("hit", "size"), hit_rate=("hit", "mean")))

    report = ForecastReport(
        model_kind=kind, predictions=predictions, by_category=Frame(category_rows), by_individual=by_individual, by_individual_category=by_individual_category,
        probabilities=tuple(probabilities), confusion=tuple(confusions), n_draws=used,
    )

    logger.info(f"Forecast {report.n_observations} holdout occasion(s) with {used} draw(s) of the '{kind}' model: hit rate {report.hit_rate:.4f}.")
    return report
