from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterator, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.special
import jax.numpy as jnp
import jax.scipy.special as jspecial

from mcdh.errors import InvalidArgumentError, ConsistencyError, SchemaError
from mcdh.gp import TimeGrid
from .dims import ModelDims


@dataclass(frozen=True, eq=False)
class ChoiceObservation:
    """One choice occasion. Rows of 'features' are alternatives, columns follow the category's coefficient layout."""
    individual: int
    category: int
    time_bucket: int
    features: np.ndarray = field(repr=False)
    chosen: int
    occasion: str = ""


@dataclass(frozen=True, eq=False)
class CategoryBlock:
    """All occasions of one category as aligned arrays: n occasions, J alternatives, P coefficients."""
    category: int
    individual: np.ndarray = field(repr=False)
    time: np.ndarray = field(repr=False)
    features: np.ndarray = field(repr=False)
    chosen: np.ndarray = field(repr=False)
    occasion: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name, dtype in [("individual", np.int64), ("time", np.int64), ("features", np.float64), ("chosen", np.int64), ("occasion", object)]:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=dtype))

    def __len__(self) -> int:
        return len(self.chosen)

    def select(self, mask: np.ndarray) -> CategoryBlock:
        return CategoryBlock(category=self.category, individual=self.individual[mask], time=self.time[mask], features=self.features[mask], chosen=self.chosen[mask], occasion=self.occasion[mask])

    @classmethod
    def empty(cls, category: int, n_brands: int, n_coefficients: int) -> CategoryBlock:
        return cls(category=category, individual=np.zeros(0), time=np.zeros(0), features=np.zeros((0, n_brands, n_coefficients)), chosen=np.zeros(0), occasion=np.zeros(0, dtype=object))


@dataclass(frozen=True, eq=False)
class Panel:
    """
    Choice occasions grouped by category, with the dimensions and time grid they refer to.
    Prices in the features are standardized; 'price_location' and 'price_scale' record the per-category training mean and SD.
    """
    blocks: tuple[CategoryBlock, ...]
    dims: ModelDims
    grid: TimeGrid
    individual_ids: tuple[str, ...] = ()
    price_location: tuple[float, ...] = ()
    price_scale: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "individual_ids", tuple(self.individual_ids) or tuple(str(index) for index in range(self.dims.I)))
        object.__setattr__(self, "price_location", tuple(self.price_location) or (0.0,) * self.dims.C)
        object.__setattr__(self, "price_scale", tuple(self.price_scale) or (1.0,) * self.dims.C)
        self._validate()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(individuals={self.dims.I}, categories={self.dims.C}, time_buckets={self.dims.T}, observations={self.n_observations})"

    def __len__(self) -> int:
        return self.n_observations

    def __iter__(self) -> Iterator[ChoiceObservation]:
        return self.observations()

    @property
    def n_observations(self) -> int:
        return sum(len(block) for block in self.blocks)

    @cached_property
    def counts(self) -> np.ndarray:
        """Occasion counts per (individual, category)."""
        counts = np.zeros((self.dims.I, self.dims.C), dtype=np.int64)
        for block in self.blocks:
            np.add.at(counts[:, block.category], block.individual, 1)

        return counts

    def equals(self, other: Panel) -> bool:
        """True when both panels hold bit-identical occasions, dimensions, grids, ids and standardization constants."""
        if not (self.dims == other.dims and self.grid == other.grid and self.individual_ids == other.individual_ids
                and self.price_location == other.price_location and self.price_scale == other.price_scale):
            return False

        return all(
            all(np.array_equal(getattr(mine, name), getattr(theirs, name)) for name in ("individual", "time", "features", "chosen", "occasion"))
            for mine, theirs in zip(self.blocks, other.blocks)
        )

    def observations(self) -> Iterator[ChoiceObservation]:
        for block in self.blocks:
            for row in range(len(block)):
                yield ChoiceObservation(individual=int(block.individual[row]), category=block.category, time_bucket=int(block.time[row]),
                                        features=block.features[row], chosen=int(block.chosen[row]), occasion=str(block.occasion[row]))

    def select_times(self, start: int, stop: Optional[int] = None) -> Panel:
        """Keep the occasions whose time bucket lies in [start, stop). Dimensions and grid are unchanged."""
        stop = self.dims.T if stop is None else stop
        return replace(self, blocks=tuple(block.select((block.time >= start) & (block.time < stop)) for block in self.blocks))

    def split(self, holdout_buckets: int) -> tuple[Panel, Panel]:
        """
        Split into a training panel over the first T - holdout_buckets buckets (with a correspondingly shortened grid)
        and a holdout panel of the remaining occasions, which keeps the full grid so its time indices stay valid.
        """
        if not 0 <= holdout_buckets < self.dims.T:
            raise InvalidArgumentError(f"holdout_buckets must lie in [0, {self.dims.T}), got {holdout_buckets}.")

        cutoff = self.dims.T - holdout_buckets
        head = self.select_times(0, cutoff)
        train = replace(head, dims=self.dims.with_time_buckets(cutoff), grid=self.grid.head(cutoff))
        return train, self.select_times(cutoff)

    def with_factors(self, factors: int) -> Panel:
        return replace(self, dims=self.dims.with_factors(factors))

    def _validate(self) -> None:
        dims = self.dims
        if len(self.grid) != dims.T:
            raise ConsistencyError(f"The time grid has {len(self.grid)} points but the dimensions declare {dims.T} time buckets.")
        if [block.category for block in self.blocks] != list(range(dims.C)):
            raise ConsistencyError(f"Expected one block per category in category order, got categories {[block.category for block in self.blocks]}.")
        if len(self.individual_ids) != dims.I:
            raise ConsistencyError(f"Expected {dims.I} individual ids, got {len(self.individual_ids)}.")
        if len(self.price_location) != dims.C or len(self.price_scale) != dims.C:
            raise ConsistencyError(f"Expected price standardization constants for {dims.C} categories.")

        for block, layout in zip(self.blocks, dims.categories):
            expected = (len(block), layout.n_brands, layout.n_coefficients)
            if block.features.shape != expected:
                raise ConsistencyError(f"Features of category '{layout.name}' should have shape {expected}, got {block.features.shape}.")
            if not all(len(array) == len(block) for array in (block.individual, block.time, block.occasion)):
                raise ConsistencyError(f"Arrays of category '{layout.name}' have unequal lengths.")
            if len(block) == 0:
                continue

            if (bad := np.flatnonzero((block.individual < 0) | (block.individual >= dims.I))).size:
                raise ConsistencyError(f"Category '{layout.name}' references unknown individual index {int(block.individual[bad[0]])} (there are {dims.I}).")
            if (bad := np.flatnonzero((block.time < 0) | (block.time >= dims.T))).size:
                raise ConsistencyError(f"Category '{layout.name}' references time bucket {int(block.time[bad[0]])} outside the grid of {dims.T} buckets.")
            if (bad := np.flatnonzero((block.chosen < 0) | (block.chosen >= layout.n_brands))).size:
                raise SchemaError(f"Category '{layout.name}' has a chosen alternative out of range in occasion '{block.occasion[bad[0]]}'.")
            if not np.all(np.isfinite(block.features)):
                raise SchemaError(f"Category '{layout.name}' has non-finite features.")
            if np.any(block.features[:, layout.baseline, :layout.n_brands - 1] != 0):
                raise ConsistencyError(f"The baseline brand '{layout.brands[layout.baseline]}' of category '{layout.name}' must have all-zero brand dummies.")

    @classmethod
    def from_observations(cls, observations: Sequence[ChoiceObservation], dims: ModelDims, grid: TimeGrid, **kwargs: Any) -> Panel:
        blocks = []
        for category, layout in enumerate(dims.categories):
            members = [observation for observation in observations if observation.category == category]
            if not members:
                blocks.append(CategoryBlock.empty(category, layout.n_brands, layout.n_coefficients))
                continue

            blocks.append(CategoryBlock(
                category=category,
                individual=[observation.individual for observation in members],
                time=[observation.time_bucket for observation in members],
                features=np.stack([np.asarray(observation.features, dtype=np.float64) for observation in members]),
                chosen=[observation.chosen for observation in members],
                occasion=np.array([observation.occasion for observation in members], dtype=object),
            ))

        return cls(blocks=tuple(blocks), dims=dims, grid=grid, **kwargs)

    @classmethod
    def empty(cls, dims: ModelDims, grid: Optional[TimeGrid] = None) -> Panel:
        return cls.from_observations([], dims=dims, grid=grid if grid is not None else TimeGrid.from_buckets(dims.T))


def utilities(observation: ChoiceObservation, beta_slice: np.ndarray) -> np.ndarray:
    """Deterministic utility of every alternative: features @ beta."""
    beta_slice = np.asarray(beta_slice, dtype=np.float64)
    if observation.features.shape[1] != beta_slice.shape[0]:
        raise InvalidArgumentError(f"Expected {observation.features.shape[1]} coefficients for this category, got {beta_slice.shape[0]}.")

    return observation.features @ beta_slice


def choice_probabilities(utilities: np.ndarray, axis: int = -1) -> np.ndarray:
    """Multinomial-logit probabilities, stabilized by subtracting the maximum utility."""
    utilities = np.asarray(utilities, dtype=np.float64)
    if not np.all(np.isfinite(utilities)):
        raise InvalidArgumentError("Utilities must be finite.")

    return scipy.special.softmax(utilities, axis=axis)


def gather_coefficients(panel: Panel, block: CategoryBlock, paths: np.ndarray, time_offset: int = 0) -> np.ndarray:
    """Sensitivities (n, P) applying to each occasion of the block. 'time_offset' is subtracted from occasion times to index 'paths'."""
    ks = panel.dims.category_index_map[block.category]
    return paths[block.individual[:, None], ks[None, :], (block.time - time_offset)[:, None]]


def block_utilities(panel: Panel, block: CategoryBlock, paths: np.ndarray, time_offset: int = 0) -> np.ndarray:
    return np.einsum("njp,np->nj", block.features, gather_coefficients(panel, block, paths, time_offset=time_offset))


def log_likelihood(panel: Panel, paths: Union[np.ndarray, Mapping[tuple[int, int], np.ndarray]]) -> float:
    """
    Sum over occasions of log P(chosen). 'paths' is either an (I, K, T) array of sensitivities or a mapping from (i, k)
    to a length-T path. Referenced paths that are missing or contain NaN raise ConsistencyError naming (i, k).
    """
    paths = _paths_as_array(panel.dims, paths)
    total = 0.0

    for block in panel.blocks:
        if not len(block):
            continue

        coefficients = gather_coefficients(panel, block, paths)
        if (bad := np.argwhere(np.isnan(coefficients))).size:
            row, position = bad[0]
            k = int(panel.dims.category_index_map[block.category][position])
            raise ConsistencyError(f"No sensitivity path for individual {int(block.individual[row])}, coefficient {k} ('{panel.dims.coefficient_names[k]}').")

        util = np.einsum("njp,np->nj", block.features, coefficients)
        chosen = np.take_along_axis(util, block.chosen[:, None], axis=1)[:, 0]
        total += float(np.sum(chosen - scipy.special.logsumexp(util, axis=1)))

    return total


def traced_log_likelihood(arrays: Sequence[tuple[Any, ...]], beta: jnp.ndarray) -> jnp.ndarray:
    """
    Differentiable panel log likelihood. 'arrays' holds, per non-empty category, the tuple
    (individual, coefficient indices, time, features, chosen) as produced by traced_panel_arrays.
    """
    total = jnp.zeros(())
    for individual, ks, time, features, chosen in arrays:
        coefficients = beta[individual[:, None], ks[None, :], time[:, None]]
        util = jnp.einsum("njp,np->nj", features, coefficients)
        total = total + jnp.sum(jnp.take_along_axis(util, chosen[:, None], axis=1)[:, 0] - jspecial.logsumexp(util, axis=1))

    return total


def traced_panel_arrays(panel: Panel) -> list[tuple[Any, ...]]:
    return [
        (jnp.asarray(block.individual), jnp.asarray(panel.dims.category_index_map[block.category]), jnp.asarray(block.time), jnp.asarray(block.features), jnp.asarray(block.chosen))
        for block in panel.blocks if len(block)
    ]


def _paths_as_array(dims: ModelDims, paths: Union[np.ndarray, Mapping[tuple[int, int], np.ndarray]]) -> np.ndarray:
    if isinstance(paths, Mapping):
        array = np.full((dims.I, dims.K, dims.T), np.nan)
        for (i, k), path in paths.items():
            array[i, k] = np.asarray(path, dtype=np.float64)
        return array

    if (array := np.asarray(paths, dtype=np.float64)).shape != (dims.I, dims.K, dims.T):
        raise ConsistencyError(f"Sensitivity paths should have shape {(dims.I, dims.K, dims.T)}, got {array.shape}.")

    return array
