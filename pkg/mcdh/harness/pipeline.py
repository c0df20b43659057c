from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from mcdh.config import PriorConfig, SamplerConfig
from mcdh.enums import Enums
from mcdh.inference.draws import PosteriorDraws
from mcdh.inference.sampler import run_chains
from mcdh.model.base import ChoiceModel
from mcdh.model.choice import Panel
from mcdh.model.posterior import Posterior

logger = logging.getLogger(__name__)

ResultT = TypeVar("ResultT")


def build_model(kind: str, panel: Panel, factors: int = 0, priors: Optional[PriorConfig] = None) -> ChoiceModel:
    """A model of the given kind over the panel's dimensions and grid. Only MCDH uses 'factors'."""
    kind = Enums.ModelKind(kind)
    dims = panel.dims.with_factors(factors if kind == Enums.ModelKind.MCDH else 0)
    return ChoiceModel.from_kind(kind, dims=dims, grid=panel.grid, priors=priors)


def fit(model: ChoiceModel, panel: Panel, config: SamplerConfig, initial_positions: Optional[Sequence[np.ndarray]] = None, config_hash: str = "") -> PosteriorDraws:
    """Sample the posterior of 'model' given 'panel' with NUTS."""
    logger.info(f"Fitting {model!r} to {panel!r} with {config.chains} chain(s) of {config.warmup} warmup and {config.samples} draw(s).")
    return run_chains(Posterior(model, panel), config, initial_positions=initial_positions, layout=model.layout, model_kind=model.kind.value, config_hash=config_hash)


def map_replications(work: Callable[[int], ResultT], seeds: Sequence[int], workers: int = 1) -> list[ResultT]:
    """Apply 'work' to every seed, concurrently when workers > 1. Results keep the order of 'seeds'."""
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            return list(pool.map(work, seeds))

    return [work(seed) for seed in seeds]
