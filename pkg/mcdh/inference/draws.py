from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Optional, Sequence

import numpy as np

from mcdh.errors import ConsistencyError
from mcdh.model.layout import ParameterBlock, ParameterLayout, ParameterState

if TYPE_CHECKING:
    from .sampler import ChainResult

STAT_NAMES = ("accept_stat", "tree_depth", "n_leapfrog", "divergent", "energy", "log_density")


@dataclass(eq=False)
class PosteriorDraws:
    """
    Post-warmup draws of the unconstrained parameter vector, shape (chains, samples, D), with per-draw sampler
    statistics and per-chain provenance (root seed, adapted step size and inverse mass).
    """
    values: np.ndarray = field(repr=False)
    layout: ParameterLayout
    stats: dict[str, np.ndarray] = field(repr=False)
    seed: int = 0
    step_sizes: np.ndarray = field(default=None, repr=False)
    inv_mass: np.ndarray = field(default=None, repr=False)
    model_kind: str = ""
    config_hash: str = ""

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3 or self.values.shape[2] != self.layout.size:
            raise ConsistencyError(f"Draw values should have shape (chains, samples, {self.layout.size}), got {self.values.shape}.")

        chains, samples = self.values.shape[:2]
        self.step_sizes = np.ones(chains) if self.step_sizes is None else np.asarray(self.step_sizes, dtype=np.float64)
        self.inv_mass = np.ones((chains, self.layout.size)) if self.inv_mass is None else np.asarray(self.inv_mass, dtype=np.float64)
        self.stats = {name: np.asarray(self.stats[name]) if name in self.stats else np.zeros((chains, samples)) for name in STAT_NAMES}

        for name, array in self.stats.items():
            if array.shape != (chains, samples):
                raise ConsistencyError(f"Sampler statistic '{name}' should have shape {(chains, samples)}, got {array.shape}.")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(chains={self.n_chains}, samples={self.n_samples}, parameters={self.layout.size}, model_kind={self.model_kind!r})"

    @property
    def n_chains(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def n_draws(self) -> int:
        return self.n_chains * self.n_samples

    @property
    def divergences(self) -> int:
        return int(np.sum(self.stats["divergent"]))

    def pooled(self) -> np.ndarray:
        """All draws as (chains * samples, D), chain-major."""
        return self.values.reshape(-1, self.layout.size)

    def state(self, chain: int, draw: int) -> ParameterState:
        return ParameterState(self.values[chain, draw], self.layout)

    def block(self, name: str) -> np.ndarray:
        """One named block across all draws, shape (chains, samples, *block shape)."""
        return self.layout.unflatten(self.values)[name]

    def evenly_spaced(self, maximum: int) -> np.ndarray:
        """Indices into pooled() of at most 'maximum' draws, evenly spaced and deterministic."""
        total = self.n_draws
        if total <= maximum:
            return np.arange(total)

        return np.unique(np.linspace(0, total - 1, maximum).round().astype(np.int64))

    def identical(self, other: PosteriorDraws) -> bool:
        """True when values, statistics, layout and provenance match bit for bit."""
        return (
            self.layout == other.layout and self.seed == other.seed and self.model_kind == other.model_kind and self.config_hash == other.config_hash
            and np.array_equal(self.values, other.values) and np.array_equal(self.step_sizes, other.step_sizes) and np.array_equal(self.inv_mass, other.inv_mass)
            and all(np.array_equal(self.stats[name], other.stats[name]) for name in STAT_NAMES)
        )

    @classmethod
    def from_chains(cls, results: Sequence[ChainResult], layout: Optional[ParameterLayout] = None, dimension: Optional[int] = None, **kwargs: Any) -> PosteriorDraws:
        if layout is None:
            layout = ParameterLayout([ParameterBlock("x", (dimension,))])

        return cls(
            values=np.stack([result.positions for result in results]),
            layout=layout,
            stats={name: np.stack([getattr(result, name) for result in results]) for name in STAT_NAMES},
            step_sizes=np.array([result.step_size for result in results]),
            inv_mass=np.stack([result.inv_mass for result in results]),
            **kwargs,
        )
