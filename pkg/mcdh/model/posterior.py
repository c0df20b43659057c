from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import jax
import jax.numpy as jnp

from mcdh.config import PriorConfig
from mcdh.errors import ConsistencyError
from .base import ChoiceModel
from .benchmarks import BenchmarkSpec
from .choice import Panel, traced_log_likelihood, traced_panel_arrays
from .core import McdhModel
from .layout import ParameterState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogDensityResult:
    value: float
    gradient: np.ndarray = field(repr=False)

    @property
    def is_finite(self) -> bool:
        """False when the value or gradient is not finite, in which case a sampler must treat the point as rejected."""
        return bool(np.isfinite(self.value) and np.all(np.isfinite(self.gradient)))


class Posterior:
    """
    The unconstrained log posterior of a model given a panel, compiled once with its gradient.
    Calling the object with a flat vector returns (value, gradient) as numpy, the form the sampler consumes.
    """

    def __init__(self, model: ChoiceModel, panel: Panel) -> None:
        # The factor count belongs to the model alone.
        if model.dims.with_factors(0) != panel.dims.with_factors(0):
            raise ConsistencyError(f"{model!r} does not match {panel!r}: the individuals, categories, brands or time buckets differ.")

        self.model, self.panel = model, panel
        self._arrays = traced_panel_arrays(panel)
        self._value_and_grad = jax.jit(jax.value_and_grad(self._density))
        self._parts = jax.jit(self._density_parts)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(model={self.model!r}, panel={self.panel!r})"

    def __call__(self, vector: np.ndarray) -> tuple[float, np.ndarray]:
        value, gradient = self._value_and_grad(jnp.asarray(vector, dtype=jnp.float64))
        return float(value), np.asarray(gradient)

    @property
    def dimension(self) -> int:
        return self.model.layout.size

    def log_posterior(self, state: Union[ParameterState, np.ndarray]) -> LogDensityResult:
        value, gradient = self(self._vector(state))
        return LogDensityResult(value=value, gradient=gradient)

    def log_prior(self, state: Union[ParameterState, np.ndarray]) -> float:
        return float(self._parts(jnp.asarray(self._vector(state)))[0])

    def log_likelihood(self, state: Union[ParameterState, np.ndarray]) -> float:
        return float(self._parts(jnp.asarray(self._vector(state)))[1])

    def _density(self, vector: jnp.ndarray) -> jnp.ndarray:
        log_prior, log_likelihood = self._density_parts(vector)
        return log_prior + log_likelihood

    def _density_parts(self, vector: jnp.ndarray) -> tuple[jnp.ndarray, jnp.ndarray]:
        log_prior, beta = self.model.evaluate(self.model.layout.unflatten(vector))
        return log_prior, traced_log_likelihood(self._arrays, beta)

    def _vector(self, state: Union[ParameterState, np.ndarray]) -> np.ndarray:
        if isinstance(state, ParameterState):
            if state.layout != self.model.layout:
                raise ConsistencyError(f"State layout {state.layout!r} does not match {self.model!r}.")
            return state.vector

        if (vector := np.asarray(state, dtype=np.float64)).shape != (self.dimension,):
            raise ConsistencyError(f"Expected a parameter vector of length {self.dimension}, got shape {vector.shape}.")

        return vector


def log_posterior(state: ParameterState, panel: Panel, priors: Optional[PriorConfig] = None) -> LogDensityResult:
    """MCDH log posterior and gradient at one state. The factor count is read from the state's layout."""
    factors = state.layout["innovations"].shape[0] if "innovations" in state.layout else panel.dims.L
    model = McdhModel(panel.dims.with_factors(factors), grid=panel.grid, priors=priors)
    return Posterior(model, panel).log_posterior(state)


def benchmark_log_posterior(spec: BenchmarkSpec, state: ParameterState, panel: Panel) -> LogDensityResult:
    return Posterior(spec.build(panel.dims, grid=panel.grid), panel).log_posterior(state)
