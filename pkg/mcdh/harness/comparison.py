from __future__ import annotations

import dataclasses
import logging
import os
import pathlib
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import pandas as pd

from mcdh.config import RunConfig
from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError
from mcdh.evaluation import ForecastReport, forecast, hit_rate_gap
from mcdh.frame import Frame
from mcdh.io.manifest import write_json
from mcdh.model.choice import Panel
from mcdh.simulation import preset_config, simulate
from .pipeline import build_model, fit, map_replications

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


@dataclass(eq=False)
class ComparisonReport:
    """Holdout scores of several models on identical splits, one row per (seed, category, model), plus each model's gap to the first."""
    preset: str
    models: tuple[str, ...]
    table: Frame = field(repr=False)
    gaps: Frame = field(repr=False)

    def summary(self) -> dict[str, Any]:
        mean_hit_rates = self.table.groupby(["category", "model"], as_index=False)["hit_rate"].mean()
        return {
            "preset": self.preset,
            "models": list(self.models),
            "seeds": sorted(set(self.table["seed"].tolist())),
            "mean_hit_rate": mean_hit_rates.to_dict(orient="records"),
            "first_model_ahead": self.gaps.assign(ahead=self.gaps["gap"] >= 0).groupby(["category", "second"], as_index=False)["ahead"].sum().to_dict(orient="records"),
        }


def compare_on_panel(panel: Panel, models: Sequence[str], config: RunConfig, seed: int = 0) -> tuple[dict[str, ForecastReport], Panel]:
    """Fit every model on the same training split of 'panel' and forecast the same holdout."""
    training, holdout = panel.split(config.split.holdout_buckets)
    sampler = dataclasses.replace(config.sampler, seed=seed)

    reports = {}
    for kind in models:
        model = build_model(kind, training, factors=config.factors, priors=config.priors)
        draws = fit(model, training, sampler, config_hash=config.hash())
        reports[kind] = forecast(draws, holdout, model, training=training, config=config.forecast, seed=seed)

    return reports, training


def run_comparison(preset: str, models: Sequence[str], seeds: Sequence[int], config: Optional[RunConfig] = None, out: Optional[PathLike] = None, **overrides: Any) -> ComparisonReport:
    """
    For each seed simulate the preset, fit each model on the same training buckets and score the same holdout buckets.
    The table is sorted by category, then model, then seed.
    """
    models = tuple(Enums.ModelKind(kind).value for kind in models)
    if not models:
        raise InvalidArgumentError("run_comparison needs at least one model.")

    config = config if config is not None else RunConfig(preset=preset)
    workers = config.sampler.with_workers_from_env().workers

    def replicate(seed: int) -> tuple[pd.DataFrame, list[pd.DataFrame]]:
        panel = simulate(preset_config(preset, seed, **{**config.simulation, **overrides})).panel
        reports, training = compare_on_panel(panel, models, config, seed=seed)

        rows = pd.concat([report.by_category.assign(seed=seed) for report in reports.values()], ignore_index=True)
        gaps = [hit_rate_gap(reports[models[0]], reports[kind], training).by_category.assign(seed=seed, first=models[0], second=kind) for kind in models[1:]]
        return rows, gaps

    results = map_replications(replicate, list(seeds), workers=workers)
    table = pd.concat([rows for rows, _ in results], ignore_index=True)
    table["model"] = pd.Categorical(table["model"], categories=list(models), ordered=True)
    table = table.sort_values(["category", "model", "seed"], kind="stable").reset_index(drop=True)
    table["model"] = table["model"].astype(str)

    gaps = [gap for _, frames in results for gap in frames]
    gaps = pd.concat(gaps, ignore_index=True) if gaps else pd.DataFrame(columns=["category", "category_name", "n_holdout", "hit_rate_first", "hit_rate_second", "gap", "n_training", "seed", "first", "second"])
    report = ComparisonReport(preset=preset, models=models, table=Frame(table), gaps=Frame(gaps))

    if out is not None:
        report.table.write_csv(pathlib.Path(out) / "comparison.csv")
        report.gaps.write_csv(pathlib.Path(out) / "comparison_gaps.csv")
        write_json(pathlib.Path(out) / "comparison_summary.json", report.summary())

    return report
