from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Any, Optional, Type

import numpy as np
import jax
import jax.numpy as jnp

from mcdh.config import PriorConfig
from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError
from mcdh.gp import TimeGrid
from .dims import ModelDims
from .layout import ParameterBlock, ParameterLayout, ParameterState

logger = logging.getLogger(__name__)


class ChoiceModel(ABC):
    """
    An abstract multinomial-logit model with individual, time-varying sensitivities. Concrete models declare their
    unconstrained parameter blocks, their prior (with every transform's log-Jacobian) and how the blocks produce the
    (I, K, T) sensitivity array. All models share the choice likelihood, the sampler and the draw store.
    """
    kind: Enums.ModelKind
    _registry: dict[Enums.ModelKind, Type[ChoiceModel]] = {}

    def __init_subclass__(cls, kind: Optional[Enums.ModelKind] = None, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if kind is not None:
            cls.kind = kind
            ChoiceModel._registry[kind] = cls

    def __init__(self, dims: ModelDims, grid: Optional[TimeGrid] = None, priors: Optional[PriorConfig] = None) -> None:
        self.dims = dims
        self.grid = grid if grid is not None else TimeGrid.from_buckets(dims.T)
        self.priors = priors if priors is not None else PriorConfig()

        if len(self.grid) != dims.T:
            raise InvalidArgumentError(f"The time grid has {len(self.grid)} points but the dimensions declare {dims.T} time buckets.")

        self._constrain_compiled = jax.jit(self._constrained_traced)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(individuals={self.dims.I}, coefficients={self.dims.K}, time_buckets={self.dims.T}, parameters={self.layout.size})"

    @cached_property
    def layout(self) -> ParameterLayout:
        return ParameterLayout(self._blocks())

    @property
    def parameter_names(self) -> list[str]:
        return self.layout.column_names

    def log_prior(self, blocks: dict[str, jnp.ndarray]) -> jnp.ndarray:
        return self.evaluate(blocks)[0]

    def sensitivities(self, blocks: dict[str, jnp.ndarray]) -> jnp.ndarray:
        return self.evaluate(blocks)[1]

    def constrain(self, state: ParameterState) -> dict[str, np.ndarray]:
        """Constrained and derived quantities of one state as numpy arrays. Always includes 'beta' of shape (I, K, T)."""
        if state.layout != self.layout:
            raise InvalidArgumentError(f"State layout {state.layout!r} does not match {self!r}.")

        return {name: np.asarray(value) for name, value in self._constrain_compiled(jnp.asarray(state.vector)).items()}

    def initial_state(self, rng: np.random.Generator, radius: float = 1.0) -> ParameterState:
        """Unconstrained parameters drawn uniformly from (-radius, radius)."""
        return ParameterState(rng.uniform(-radius, radius, size=self.layout.size), self.layout)

    def heterogeneity_correlation(self, constrained: dict[str, np.ndarray]) -> Optional[np.ndarray]:
        """The K x K correlation matrix of individual heterogeneity, for models that estimate one."""
        return constrained.get("corr")

    @abstractmethod
    def _blocks(self) -> list[ParameterBlock]:
        raise NotImplementedError

    @abstractmethod
    def evaluate(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray]:
        """Return (log prior including log-Jacobians, sensitivities of shape (I, K, T)) for unflattened unconstrained blocks."""
        raise NotImplementedError

    @abstractmethod
    def _constrained_traced(self, vector: jnp.ndarray) -> dict[str, jnp.ndarray]:
        raise NotImplementedError

    @abstractmethod
    def extrapolate(self, constrained: dict[str, np.ndarray], new_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw sensitivities (I, K, H) at times beyond the training grid, conditional on one constrained draw."""
        raise NotImplementedError

    @classmethod
    def from_kind(cls, kind: Enums.ModelKind, dims: ModelDims, grid: Optional[TimeGrid] = None, priors: Optional[PriorConfig] = None) -> ChoiceModel:
        kind = Enums.ModelKind(kind)
        if kind not in cls._registry:
            raise InvalidArgumentError(f"No model is registered for kind '{kind.value}'. Known kinds: {[known.value for known in cls._registry]}.")

        return cls._registry[kind](dims=dims, grid=grid, priors=priors)
