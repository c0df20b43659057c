"""Synthetic panels drawn from the latent-factor generative process, with the ground truth kept alongside."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Sequence, Union

import numpy as np

from mcdh.errors import ConfigError
from mcdh.gp import TimeGrid
from mcdh.model.choice import CategoryBlock, Panel, choice_probabilities
from mcdh.model.core import LatentFactorSet, SensitivityPath, realize_factors, assemble_all
from mcdh.model.dims import CategoryLayout, ModelDims

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    """
    Generative settings. 'brands' and 'choices_per_period' hold one entry per category. Weight rows omega_il are drawn
    N(0, Sigma) with Sigma = omega_variance * I unless 'omega_covariance' (K x K) or 'price_correlation' say otherwise.
    'alpha' is a scalar or one value per coefficient. Prices are iid normal(price_mean, price_sd) per alternative and occasion.
    """
    individuals: int = 40
    brands: tuple[int, ...] = (4, 4, 4)
    time_buckets: int = 8
    choices_per_period: tuple[int, ...] = (10, 10, 10)
    length_scales: tuple[float, ...] = (2.0, 6.0)
    omega_variance: float = 2.0
    omega_covariance: Optional[tuple[tuple[float, ...], ...]] = None
    price_correlation: float = 0.0
    alpha: Union[float, tuple[float, ...]] = 0.0
    price_mean: float = 0.0
    price_sd: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "brands", tuple(int(count) for count in self.brands))
        choices = (self.choices_per_period,) * len(self.brands) if isinstance(self.choices_per_period, int) else self.choices_per_period
        object.__setattr__(self, "choices_per_period", tuple(int(count) for count in choices))
        object.__setattr__(self, "length_scales", tuple(float(rho) for rho in self.length_scales))
        if not isinstance(self.alpha, (int, float)):
            object.__setattr__(self, "alpha", tuple(float(value) for value in self.alpha))
        if self.omega_covariance is not None:
            object.__setattr__(self, "omega_covariance", tuple(tuple(float(value) for value in row) for row in self.omega_covariance))

        if self.individuals < 1 or self.time_buckets < 1:
            raise ConfigError(f"simulation needs at least one individual and one time bucket, got individuals={self.individuals}, time_buckets={self.time_buckets}.")
        if not self.brands or any(count < 2 for count in self.brands):
            raise ConfigError(f"Every simulated category needs at least two brands, got {list(self.brands)}.")
        if len(self.choices_per_period) != len(self.brands) or any(count < 0 for count in self.choices_per_period):
            raise ConfigError(f"choices_per_period needs one non-negative count per category ({len(self.brands)}), got {list(self.choices_per_period)}.")
        if any(rho <= 0 for rho in self.length_scales):
            raise ConfigError(f"length_scales must be positive, got {list(self.length_scales)}.")
        if self.omega_variance < 0 or self.price_sd <= 0:
            raise ConfigError("omega_variance must be non-negative and price_sd positive.")
        if not -1.0 < self.price_correlation < 1.0:
            raise ConfigError(f"price_correlation must lie in (-1, 1), got {self.price_correlation}.")
        if isinstance(self.alpha, tuple) and len(self.alpha) != self.dims.K:
            raise ConfigError(f"alpha needs one value per coefficient ({self.dims.K}), got {len(self.alpha)}.")
        if self.omega_covariance is not None and np.shape(self.omega_covariance) != (self.dims.K, self.dims.K):
            raise ConfigError(f"omega_covariance must be {self.dims.K} x {self.dims.K}, got shape {np.shape(self.omega_covariance)}.")

    @cached_property
    def dims(self) -> ModelDims:
        categories = tuple(CategoryLayout(name=f"c{category}", brands=tuple(f"b{brand}" for brand in range(count))) for category, count in enumerate(self.brands))
        return ModelDims(individuals=self.individuals, categories=categories, time_buckets=self.time_buckets, factors=len(self.length_scales))

    @cached_property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_buckets(self.time_buckets)

    @property
    def alpha_vector(self) -> np.ndarray:
        return np.full(self.dims.K, float(self.alpha)) if isinstance(self.alpha, (int, float)) else np.asarray(self.alpha, dtype=np.float64)

    @property
    def sigma_omega(self) -> np.ndarray:
        """Covariance of each weight row omega_il across the K coefficients."""
        if self.omega_covariance is not None:
            return np.asarray(self.omega_covariance, dtype=np.float64)

        sigma = self.omega_variance * np.eye(self.dims.K)
        if self.price_correlation:
            prices = [self.dims.price_index(category) for category in range(self.dims.C)]
            for first in prices:
                for second in prices:
                    if first != second:
                        sigma[first, second] = self.price_correlation * self.omega_variance

        return sigma

    @property
    def n_observations(self) -> int:
        return self.individuals * self.time_buckets * sum(self.choices_per_period)

    def replace(self, **changes: Any) -> SimConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {item.name: getattr(self, item.name) for item in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimConfig:
        if unknown := set(data) - {item.name for item in dataclasses.fields(cls)}:
            raise ConfigError(f"Unknown simulation key(s) {sorted(unknown)}, valid keys are {[item.name for item in dataclasses.fields(cls)]}.")

        return cls(**data)


@dataclass(frozen=True)
class SimTruth:
    """Every constrained quantity used to generate a panel, including the realized factors and all sensitivity paths."""
    alpha: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    sigma_omega: np.ndarray = field(repr=False)
    factors: LatentFactorSet
    beta: np.ndarray = field(repr=False)

    @property
    def length_scales(self) -> np.ndarray:
        return self.factors.length_scales

    @property
    def tau(self) -> np.ndarray:
        return np.sqrt(np.diag(self.sigma_omega))

    @property
    def corr(self) -> np.ndarray:
        tau = self.tau
        safe = np.where(tau > 0, tau, 1.0)
        corr = self.sigma_omega / np.outer(safe, safe)
        np.fill_diagonal(corr, 1.0)
        return corr

    def sensitivity_paths(self) -> list[SensitivityPath]:
        return [SensitivityPath(individual=i, coefficient=k, values=self.beta[i, k]) for i in range(self.beta.shape[0]) for k in range(self.beta.shape[1])]

    def constrained(self, time_buckets: Optional[int] = None) -> dict[str, np.ndarray]:
        """The truth in the form ChoiceModel.constrain returns, restricted to the first 'time_buckets' buckets."""
        stop = self.beta.shape[2] if time_buckets is None else time_buckets
        return {
            "innovations": self.factors.innovations[:, :stop],
            "length_scales": self.length_scales,
            "alpha": self.alpha,
            "omega": self.omega,
            "tau": self.tau,
            "corr": self.corr,
            "sigma_omega": self.sigma_omega,
            "factors": self.factors.realized[:, :stop],
            "beta": self.beta[:, :, :stop],
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha.tolist(),
            "omega": self.omega.tolist(),
            "sigma_omega": self.sigma_omega.tolist(),
            "length_scales": self.length_scales.tolist(),
            "innovations": self.factors.innovations.tolist(),
            "factors": self.factors.realized.tolist(),
            "beta": self.beta.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimTruth:
        factors = LatentFactorSet(innovations=np.asarray(data["innovations"], dtype=np.float64), length_scales=np.asarray(data["length_scales"], dtype=np.float64), realized=np.asarray(data["factors"], dtype=np.float64))
        return cls(alpha=np.asarray(data["alpha"], dtype=np.float64), omega=np.asarray(data["omega"], dtype=np.float64), sigma_omega=np.asarray(data["sigma_omega"], dtype=np.float64),
                   factors=factors, beta=np.asarray(data["beta"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class SimOutput:
    panel: Panel
    truth: SimTruth
    config: SimConfig


def draw_truth(config: SimConfig, rng: np.random.Generator) -> SimTruth:
    """Latent factors from their GP priors, weight rows from N(0, Sigma_omega), then beta_ik(t) = alpha_k + sum_l omega_ikl u_l(t)."""
    dims = config.dims
    innovations = rng.standard_normal((dims.L, dims.T))
    factors = realize_factors(innovations, np.asarray(config.length_scales), config.grid)

    sigma = config.sigma_omega
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    if np.min(eigenvalues) < -1e-10 * max(1.0, np.max(np.abs(eigenvalues))):
        raise ConfigError(f"The weight covariance must be positive semi-definite, its smallest eigenvalue is {np.min(eigenvalues):.3g}.")

    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))[None, :]
    omega = np.einsum("kj,ijl->ikl", root, rng.standard_normal((dims.I, dims.K, dims.L)))
    alpha = config.alpha_vector

    return SimTruth(alpha=alpha, omega=omega, sigma_omega=sigma, factors=factors, beta=assemble_all(alpha, omega, factors.realized))


def draw_choices(config: SimConfig, beta: np.ndarray, rng: np.random.Generator) -> list[CategoryBlock]:
    """Prices and choices for every category, individual, bucket and repeat, in that nesting order."""
    dims = config.dims
    blocks = []

    for category, (layout, repeats) in enumerate(zip(dims.categories, config.choices_per_period)):
        individual, time, repeat = (axis.reshape(-1) for axis in np.meshgrid(np.arange(dims.I), np.arange(dims.T), np.arange(repeats), indexing="ij"))
        count = len(individual)

        features = np.zeros((count, layout.n_brands, layout.n_coefficients))
        for position, brand in enumerate(layout.dummy_brands):
            features[:, brand, position] = 1.0
        features[:, :, layout.price_position] = rng.normal(config.price_mean, config.price_sd, size=(count, layout.n_brands))

        ks = dims.category_index_map[category]
        coefficients = beta[individual[:, None], ks[None, :], time[:, None]]
        probabilities = choice_probabilities(np.einsum("njp,np->nj", features, coefficients))

        cumulative = np.cumsum(probabilities, axis=1)
        chosen = np.minimum((cumulative < rng.uniform(size=count)[:, None]).sum(axis=1), layout.n_brands - 1)

        occasion = np.array([f"{i}-{category}-{t}-{r}" for i, t, r in zip(individual, time, repeat)], dtype=object)
        blocks.append(CategoryBlock(category=category, individual=individual, time=time, features=features, chosen=chosen, occasion=occasion))

    return blocks


def simulate(config: SimConfig) -> SimOutput:
    """Draw the truth, then prices and choices, from one generator seeded with config.seed. The output is a pure function of the config."""
    rng = np.random.default_rng(config.seed)
    truth = draw_truth(config, rng)
    panel = Panel(blocks=tuple(draw_choices(config, truth.beta, rng)), dims=config.dims, grid=config.grid)

    logger.info(f"Simulated {panel.n_observations} choice occasion(s) for {config.individuals} individual(s), {len(config.brands)} category(ies) and {config.time_buckets} time bucket(s) with seed {config.seed}.")
    return SimOutput(panel=panel, truth=truth, config=config)
