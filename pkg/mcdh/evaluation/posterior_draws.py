from __future__ import annotations

from typing import Iterator

import numpy as np

from mcdh.errors import ConsistencyError
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.base import ChoiceModel


def check_compatible(draws: PosteriorDraws, model: ChoiceModel) -> None:
    if draws.model_kind and draws.model_kind != model.kind.value:
        raise ConsistencyError(f"Draws of a '{draws.model_kind}' model cannot be evaluated with {model!r}.")
    if draws.layout != model.layout:
        raise ConsistencyError(f"The draws' parameter layout ({draws.layout.size} parameters) does not match {model!r}.")


def iter_constrained(draws: PosteriorDraws, model: ChoiceModel, max_draws: int) -> Iterator[dict[str, np.ndarray]]:
    """Constrained quantities of at most 'max_draws' evenly spaced pooled draws, in pooled order."""
    check_compatible(draws, model)

    for index in draws.evenly_spaced(max_draws):
        yield model.constrain(draws.state(*divmod(int(index), draws.n_samples)))


def interval_quantiles(interval: float) -> tuple[float, float]:
    """Lower and upper quantile levels of a central interval."""
    return (1.0 - interval) / 2.0, (1.0 + interval) / 2.0


def summarize(samples: np.ndarray, interval: float, axis: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Median and central-interval endpoints along 'axis'."""
    lower, upper = interval_quantiles(interval)
    return np.median(samples, axis=axis), np.quantile(samples, lower, axis=axis), np.quantile(samples, upper, axis=axis)
