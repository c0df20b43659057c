from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import jax
import jax.numpy as jnp
import jax.scipy.stats as jstats

from mcdh.config import PriorConfig
from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError
from mcdh.gp import TimeGrid, SEKernelParams, se_cholesky_traced, gp_extrapolate
from .base import ChoiceModel
from .dims import ModelDims
from .layout import ParameterBlock
from .transforms import (
    n_partial_correlations, corr_cholesky_from_unconstrained, lkj_cholesky_log_density,
    half_normal_log_density_of_log, log_normal_log_density_of_log,
)

BENCHMARK_KINDS = (Enums.ModelKind.LOGIT, Enums.ModelKind.LOGIT_INFO, Enums.ModelKind.OFFSETS, Enums.ModelKind.OFFSETS_INFO, Enums.ModelKind.GPDH)


@dataclass(frozen=True)
class BenchmarkSpec:
    """Which comparison model to build, with its hyperprior settings."""
    kind: Enums.ModelKind
    priors: PriorConfig = field(default_factory=PriorConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Enums.ModelKind(self.kind))
        if self.kind not in BENCHMARK_KINDS:
            raise InvalidArgumentError(f"'{self.kind.value}' is not a benchmark model. Benchmarks are: {[kind.value for kind in BENCHMARK_KINDS]}.")

    def build(self, dims: ModelDims, grid: Optional[TimeGrid] = None) -> ChoiceModel:
        return ChoiceModel.from_kind(self.kind, dims=dims, grid=grid, priors=self.priors)


@dataclass(frozen=True)
class ArmaMeanParams:
    """Per-coefficient ARMA(1, 1) mean dynamics: mu_t = alpha0 + alpha1 mu_{t-1} + alpha2 zeta_{t-1} + zeta_t."""
    alpha0: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    innovation_sd: np.ndarray
    innovations: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("alpha0", "alpha1", "alpha2", "innovation_sd"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
        object.__setattr__(self, "innovations", np.atleast_2d(np.asarray(self.innovations, dtype=np.float64)))

        if np.any(self.innovation_sd <= 0):
            raise InvalidArgumentError(f"ARMA innovation SDs must be positive, got {self.innovation_sd.tolist()}.")
        if not all(np.all(np.isfinite(getattr(self, name))) for name in ("alpha0", "alpha1", "alpha2", "innovations")):
            raise InvalidArgumentError("ARMA parameters must be finite.")


def arma_mean_traced(alpha0: jnp.ndarray, alpha1: jnp.ndarray, alpha2: jnp.ndarray, zeta: jnp.ndarray, initial: Optional[jnp.ndarray] = None) -> jnp.ndarray:
    """
    ARMA mean paths over the last axis of 'zeta'. The first value is initial + zeta_1, where 'initial' defaults to the
    stationary mean alpha0 / (1 - alpha1) when |alpha1| < 1 and to alpha0 otherwise.
    """
    if initial is None:
        stable = jnp.abs(alpha1) < 1
        initial = jnp.where(stable, alpha0 / jnp.where(stable, 1.0 - alpha1, 1.0), alpha0)

    means = [initial + zeta[..., 0]]
    for t in range(1, zeta.shape[-1]):
        means.append(alpha0 + alpha1 * means[-1] + alpha2 * zeta[..., t - 1] + zeta[..., t])

    return jnp.stack(means, axis=-1)


def arma_mean_recursion(params: ArmaMeanParams, time_buckets: int, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """The (K, T) mean sequence; 'initial' overrides the stationary starting level."""
    if time_buckets < 1:
        raise InvalidArgumentError(f"At least one time bucket is required, got {time_buckets}.")
    if params.innovations.shape[-1] < time_buckets:
        raise InvalidArgumentError(f"{time_buckets} buckets requested but only {params.innovations.shape[-1]} innovations supplied.")

    zeta = params.innovations[..., :time_buckets]
    return np.asarray(arma_mean_traced(params.alpha0, params.alpha1, params.alpha2, zeta, initial=None if initial is None else np.asarray(initial, dtype=np.float64)))


class HeterogeneityMixin:
    """Individual deviations scaled either by a diagonal (log_sigma) or by diag(tau) times a correlation Cholesky factor."""
    correlated = False
    raw_block = "beta_raw"

    def _heterogeneity_blocks(self) -> list[ParameterBlock]:
        K = self.dims.K
        scales = [ParameterBlock("log_tau", (K,)), ParameterBlock("corr_unconstrained", (n_partial_correlations(K),))] if self.correlated else [ParameterBlock("log_sigma", (K,))]
        return [*scales, ParameterBlock(self.raw_block, (self.dims.I, K))]

    def _heterogeneity(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray, dict[str, jnp.ndarray]]:
        """Return (log prior, (I, K) deviations, constrained scale quantities)."""
        priors = self.priors
        log_prior = jnp.sum(jstats.norm.logpdf(blocks[self.raw_block]))

        if self.correlated:
            corr_factor, log_jacobian = corr_cholesky_from_unconstrained(blocks["corr_unconstrained"], self.dims.K)
            tau = jnp.exp(blocks["log_tau"])
            log_prior += jnp.sum(half_normal_log_density_of_log(blocks["log_tau"], priors.tau_scale)) + lkj_cholesky_log_density(corr_factor, priors.lkj_shape) + log_jacobian
            scale_factor = tau[:, None] * corr_factor
            corr = corr_factor @ corr_factor.T
            constrained = {"tau": tau, "corr": corr, "sigma_beta": tau[:, None] * corr * tau[None, :]}
        else:
            sigma = jnp.exp(blocks["log_sigma"])
            log_prior += jnp.sum(half_normal_log_density_of_log(blocks["log_sigma"], priors.tau_scale))
            scale_factor = jnp.diag(sigma)
            constrained = {"sigma": sigma}

        return log_prior, jnp.einsum("kj,ij->ik", scale_factor, blocks[self.raw_block]), constrained


class LogitModel(HeterogeneityMixin, ChoiceModel, kind=Enums.ModelKind.LOGIT):
    """Static random coefficients: beta_i = mu + diag(sigma) beta_raw_i."""

    def _blocks(self) -> list[ParameterBlock]:
        return [ParameterBlock("mu", (self.dims.K,)), *self._heterogeneity_blocks()]

    def evaluate(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray]:
        log_prior, deviations, _ = self._heterogeneity(blocks)
        log_prior += jnp.sum(jstats.norm.logpdf(blocks["mu"], 0.0, self.priors.alpha_sd))
        static = blocks["mu"][None, :] + deviations
        return log_prior, jnp.broadcast_to(static[:, :, None], (self.dims.I, self.dims.K, self.dims.T))

    def _constrained_traced(self, vector: jnp.ndarray) -> dict[str, jnp.ndarray]:
        blocks = self.layout.unflatten(vector)
        _, deviations, constrained = self._heterogeneity(blocks)
        static = blocks["mu"][None, :] + deviations
        return {"mu": blocks["mu"], **constrained, "beta_static": static, "beta": jnp.broadcast_to(static[:, :, None], (self.dims.I, self.dims.K, self.dims.T))}

    def extrapolate(self, constrained: dict[str, np.ndarray], new_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.repeat(constrained["beta_static"][:, :, None], len(np.atleast_1d(new_times)), axis=2)


class LogitInfoModel(LogitModel, kind=Enums.ModelKind.LOGIT_INFO):
    """Static random coefficients with a full correlation structure: beta_i ~ N(mu, diag(tau) Lambda diag(tau))."""
    correlated = True


class OffsetsModel(HeterogeneityMixin, ChoiceModel, kind=Enums.ModelKind.OFFSETS):
    """
    A dynamic population mean mu_k(t) ~ GP(mu_level_k, SE(amplitude, length_scale)), with one amplitude and length scale
    shared by all coefficients, plus time-constant individual offsets.
    """
    raw_block = "offset_raw"

    def _blocks(self) -> list[ParameterBlock]:
        K, T = self.dims.K, self.dims.T
        return [
            ParameterBlock("mu_level", (K,)),
            ParameterBlock("mean_innovations", (K, T)),
            ParameterBlock("log_gp_amplitude", ()),
            ParameterBlock("log_gp_length_scale", ()),
            *self._heterogeneity_blocks(),
        ]

    def _mean_path(self, blocks: dict[str, jnp.ndarray]) -> jnp.ndarray:
        factor = se_cholesky_traced(self.grid.points, jnp.exp(blocks["log_gp_length_scale"]), amplitude=jnp.exp(blocks["log_gp_amplitude"]), jitter=self.priors.jitter)
        return blocks["mu_level"][:, None] + blocks["mean_innovations"] @ factor.T

    def evaluate(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray]:
        priors = self.priors
        log_prior, offsets, _ = self._heterogeneity(blocks)
        log_prior += (
            jnp.sum(jstats.norm.logpdf(blocks["mu_level"], 0.0, priors.alpha_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["mean_innovations"]))
            + half_normal_log_density_of_log(blocks["log_gp_amplitude"], priors.amplitude_scale)
            + log_normal_log_density_of_log(blocks["log_gp_length_scale"], priors.length_scale_median, priors.length_scale_log_sd)
        )
        return log_prior, self._mean_path(blocks)[None, :, :] + offsets[:, :, None]

    def _constrained_traced(self, vector: jnp.ndarray) -> dict[str, jnp.ndarray]:
        blocks = self.layout.unflatten(vector)
        _, offsets, constrained = self._heterogeneity(blocks)
        mean_path = self._mean_path(blocks)
        return {
            "mu_level": blocks["mu_level"],
            "gp_amplitude": jnp.exp(blocks["log_gp_amplitude"]),
            "gp_length_scale": jnp.exp(blocks["log_gp_length_scale"]),
            "mean_path": mean_path,
            **constrained,
            "offsets": offsets,
            "beta": mean_path[None, :, :] + offsets[:, :, None],
        }

    def extrapolate(self, constrained: dict[str, np.ndarray], new_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        level = constrained["mu_level"][:, None]
        params = SEKernelParams(amplitude=float(constrained["gp_amplitude"]), length_scale=float(constrained["gp_length_scale"]))
        future = gp_extrapolate(constrained["mean_path"], self.grid, new_times, params=params, rng=rng, train_mean=level, new_mean=level, jitter=self.priors.jitter).draw
        return future[None, :, :] + constrained["offsets"][:, :, None]


class OffsetsInfoModel(OffsetsModel, kind=Enums.ModelKind.OFFSETS_INFO):
    """Fixed offsets whose deviations across coefficients are correlated."""
    correlated = True


class GpdhModel(ChoiceModel, kind=Enums.ModelKind.GPDH):
    """
    Independent per-coefficient individual GPs around an ARMA-driven population mean:
    beta_ik(t) ~ GP(mu_k(t), SE(sigma_k, rho_k)), with per-coefficient ARMA coefficients alpha0_k, alpha1_k and alpha2_k.
    """

    def _blocks(self) -> list[ParameterBlock]:
        I, K, T = self.dims.I, self.dims.K, self.dims.T
        return [
            ParameterBlock("alpha0", (K,)),
            ParameterBlock("alpha1", (K,)),
            ParameterBlock("alpha2", (K,)),
            ParameterBlock("log_tau", (K,)),
            ParameterBlock("zeta_raw", (K, T)),
            ParameterBlock("log_gp_amplitude", (K,)),
            ParameterBlock("log_gp_length_scale", (K,)),
            ParameterBlock("eta", (I, K, T)),
        ]

    def _paths(self, blocks: dict[str, jnp.ndarray]) -> dict[str, jnp.ndarray]:
        tau = jnp.exp(blocks["log_tau"])
        zeta = tau[:, None] * blocks["zeta_raw"]
        mean_path = arma_mean_traced(blocks["alpha0"], blocks["alpha1"], blocks["alpha2"], zeta)

        amplitude, length_scale = jnp.exp(blocks["log_gp_amplitude"]), jnp.exp(blocks["log_gp_length_scale"])
        factors = jax.vmap(lambda scale, rho: se_cholesky_traced(self.grid.points, rho, amplitude=scale, jitter=self.priors.jitter))(amplitude, length_scale)
        beta = mean_path[None, :, :] + jnp.einsum("kts,iks->ikt", factors, blocks["eta"])

        return {"tau": tau, "zeta": zeta, "mean_path": mean_path, "gp_amplitude": amplitude, "gp_length_scale": length_scale, "beta": beta}

    def evaluate(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray]:
        priors = self.priors
        log_prior = (
            jnp.sum(jstats.norm.logpdf(blocks["alpha0"], 0.0, priors.alpha_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["alpha1"], 0.0, priors.arma_coef_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["alpha2"], 0.0, priors.arma_coef_sd))
            + jnp.sum(half_normal_log_density_of_log(blocks["log_tau"], priors.tau_scale))
            + jnp.sum(jstats.norm.logpdf(blocks["zeta_raw"]))
            + jnp.sum(half_normal_log_density_of_log(blocks["log_gp_amplitude"], priors.amplitude_scale))
            + jnp.sum(log_normal_log_density_of_log(blocks["log_gp_length_scale"], priors.length_scale_median, priors.length_scale_log_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["eta"]))
        )
        return log_prior, self._paths(blocks)["beta"]

    def _constrained_traced(self, vector: jnp.ndarray) -> dict[str, jnp.ndarray]:
        blocks = self.layout.unflatten(vector)
        return {"alpha0": blocks["alpha0"], "alpha1": blocks["alpha1"], "alpha2": blocks["alpha2"], **self._paths(blocks)}

    def extrapolate(self, constrained: dict[str, np.ndarray], new_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        new_times = np.atleast_1d(np.asarray(new_times, dtype=np.float64))
        alpha0, alpha1, alpha2, tau = constrained["alpha0"], constrained["alpha1"], constrained["alpha2"], constrained["tau"]

        previous_mean, previous_zeta = constrained["mean_path"][:, -1], constrained["zeta"][:, -1]
        future_mean = np.empty((self.dims.K, len(new_times)))
        for step in range(len(new_times)):
            zeta = tau * rng.standard_normal(self.dims.K)
            future_mean[:, step] = previous_mean = alpha0 + alpha1 * previous_mean + alpha2 * previous_zeta + zeta
            previous_zeta = zeta

        future = np.empty((self.dims.I, self.dims.K, len(new_times)))
        for k in range(self.dims.K):
            params = SEKernelParams(amplitude=float(constrained["gp_amplitude"][k]), length_scale=float(constrained["gp_length_scale"][k]))
            future[:, k, :] = gp_extrapolate(constrained["beta"][:, k, :], self.grid, new_times, params=params, rng=rng,
                                             train_mean=constrained["mean_path"][k], new_mean=future_mean[k], jitter=self.priors.jitter).draw

        return future
