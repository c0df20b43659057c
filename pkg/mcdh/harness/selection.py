from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from mcdh.config import RunConfig
from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError
from mcdh.evaluation import forecast
from mcdh.frame import Frame
from mcdh.model.choice import Panel
from .pipeline import build_model, fit

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FactorSelection:
    table: Frame = field(repr=False)
    chosen: int

    def summary(self) -> dict[str, Any]:
        return {"chosen": self.chosen, "candidates": self.table.to_dict(orient="records")}


def select_factor_count(panel: Panel, candidates: Sequence[int], config: Optional[RunConfig] = None) -> FactorSelection:
    """
    Fit MCDH with every candidate factor count on the training buckets and score the holdout buckets. The chosen count has
    the highest mean hit rate over categories, the smaller count winning ties.
    """
    config = config if config is not None else RunConfig()
    if not (candidates := sorted(set(int(count) for count in candidates))) or candidates[0] < 0:
        raise InvalidArgumentError(f"Candidate factor counts must be non-negative and at least one is needed, got {list(candidates)}.")

    training, holdout = panel.split(config.split.holdout_buckets)
    sampler = dataclasses.replace(config.sampler, seed=config.seed)

    rows = []
    for factors in candidates:
        model = build_model(Enums.ModelKind.MCDH.value, training, factors=factors, priors=config.priors)
        report = forecast(fit(model, training, sampler, config_hash=config.hash()), holdout, model, training=training, config=config.forecast, seed=config.seed)
        rows.append({"factors": factors, "mean_hit_rate": float(np.nanmean(report.by_category["hit_rate"].to_numpy(dtype=np.float64))), "hit_rate": report.hit_rate})
        logger.info(f"{factors} factor(s): mean holdout hit rate {rows[-1]['mean_hit_rate']:.4f}.")

    table = Frame(rows)
    scores = table["mean_hit_rate"].to_numpy(dtype=np.float64)
    chosen = int(table["factors"].iloc[int(np.nanargmax(scores))]) if np.isfinite(scores).any() else candidates[0]
    return FactorSelection(table=table, chosen=chosen)
