from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from mcdh.errors import InvalidArgumentError, ConsistencyError


@dataclass(frozen=True)
class CategoryLayout:
    """
    Coefficient layout of one category: J-1 brand dummies (the baseline brand has none) followed by the price slope
    and then any extra marketing-mix columns, in that order.
    """
    name: str
    brands: tuple[str, ...]
    baseline: int = 0
    extra_features: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "brands", tuple(str(brand) for brand in self.brands))
        object.__setattr__(self, "extra_features", tuple(self.extra_features))

        if not self.brands:
            raise InvalidArgumentError(f"Category '{self.name}' needs at least one brand.")
        if len(set(self.brands)) != len(self.brands):
            raise InvalidArgumentError(f"Category '{self.name}' has duplicate brands: {list(self.brands)}.")
        if not 0 <= self.baseline < len(self.brands):
            raise InvalidArgumentError(f"Baseline index {self.baseline} is out of range for the {len(self.brands)} brands of category '{self.name}'.")

    @property
    def n_brands(self) -> int:
        return len(self.brands)

    @property
    def n_coefficients(self) -> int:
        return self.n_brands - 1 + 1 + len(self.extra_features)

    @property
    def dummy_brands(self) -> list[int]:
        return [index for index in range(self.n_brands) if index != self.baseline]

    @property
    def price_position(self) -> int:
        return self.n_brands - 1

    @property
    def coefficient_names(self) -> list[str]:
        return [*[f"{self.name}:brand={self.brands[index]}" for index in self.dummy_brands], f"{self.name}:price", *[f"{self.name}:{extra}" for extra in self.extra_features]]

    def design_row(self, brand: int, price: float, extras: Sequence[float] = ()) -> np.ndarray:
        """Feature vector of one alternative under this layout."""
        row = np.zeros(self.n_coefficients)
        if brand != self.baseline:
            row[self.dummy_brands.index(brand)] = 1.0

        row[self.price_position] = price
        row[self.price_position + 1:] = extras
        return row


@dataclass(frozen=True)
class ModelDims:
    """
    Sizes of one model instance. Coefficients are indexed category by category in category order,
    each category contributing its CategoryLayout.coefficient_names in order, so k runs over 0..K-1.
    """
    individuals: int
    categories: tuple[CategoryLayout, ...]
    time_buckets: int
    factors: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))

        if self.individuals < 1:
            raise InvalidArgumentError(f"At least one individual is required, got {self.individuals}.")
        if not self.categories:
            raise InvalidArgumentError("At least one category is required.")
        if len({category.name for category in self.categories}) != len(self.categories):
            raise InvalidArgumentError(f"Category names must be unique, got {[category.name for category in self.categories]}.")
        if self.time_buckets < 1:
            raise InvalidArgumentError(f"At least one time bucket is required, got {self.time_buckets}.")
        if self.factors < 0:
            raise InvalidArgumentError(f"The factor count cannot be negative, got {self.factors}.")

    @property
    def I(self) -> int:
        return self.individuals

    @property
    def C(self) -> int:
        return len(self.categories)

    @property
    def T(self) -> int:
        return self.time_buckets

    @property
    def L(self) -> int:
        return self.factors

    @property
    def J(self) -> list[int]:
        return [category.n_brands for category in self.categories]

    @property
    def P(self) -> list[int]:
        return [category.n_coefficients for category in self.categories]

    @property
    def K(self) -> int:
        return sum(self.P)

    @cached_property
    def offsets(self) -> list[int]:
        return [int(offset) for offset in np.concatenate([[0], np.cumsum(self.P)[:-1]])]

    @cached_property
    def coefficient_names(self) -> list[str]:
        return [name for category in self.categories for name in category.coefficient_names]

    @cached_property
    def coefficient_category(self) -> np.ndarray:
        """Category index of every coefficient k."""
        return np.repeat(np.arange(self.C), self.P)

    @cached_property
    def category_index_map(self) -> list[np.ndarray]:
        """For every category, the coefficient indices k that belong to it."""
        return [np.arange(offset, offset + size) for offset, size in zip(self.offsets, self.P)]

    def coefficient_index(self, category: int, position: int) -> int:
        """Map (category, coefficient position within the category) to the global coefficient index k."""
        if not 0 <= category < self.C:
            raise ConsistencyError(f"Category index {category} is out of range for {self.C} categories.")
        if not 0 <= position < self.P[category]:
            raise ConsistencyError(f"Coefficient position {position} is out of range for the {self.P[category]} coefficients of category '{self.categories[category].name}'.")

        return self.offsets[category] + position

    def price_index(self, category: int) -> int:
        return self.coefficient_index(category, self.categories[category].price_position)

    def with_factors(self, factors: int) -> ModelDims:
        return type(self)(individuals=self.individuals, categories=self.categories, time_buckets=self.time_buckets, factors=factors)

    def with_time_buckets(self, time_buckets: int) -> ModelDims:
        return type(self)(individuals=self.individuals, categories=self.categories, time_buckets=time_buckets, factors=self.factors)
