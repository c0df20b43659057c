from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import jax.numpy as jnp
import jax.scipy.stats as jstats
import scipy.linalg

from mcdh.enums import Enums
from mcdh.errors import InvalidArgumentError, ConsistencyError
from mcdh.gp import TimeGrid, SEKernelParams, build_covariance, cholesky_lower, se_cholesky_traced, gp_extrapolate
from .base import ChoiceModel
from .layout import ParameterBlock, ParameterState
from .transforms import (
    n_partial_correlations, corr_cholesky_from_unconstrained, unconstrained_from_corr, lkj_cholesky_log_density,
    half_normal_log_density_of_log, log_normal_log_density_of_log,
)


@dataclass(frozen=True)
class LatentFactorSet:
    """L unit-amplitude latent GP factors: the standard-normal innovations, their length scales and the realized paths."""
    innovations: np.ndarray = field(repr=False)
    length_scales: np.ndarray
    realized: np.ndarray = field(repr=False)

    @property
    def n_factors(self) -> int:
        return self.realized.shape[0]

    def flipped(self, factor: int) -> LatentFactorSet:
        """The same set with the sign of one factor reversed."""
        signs = np.ones(self.n_factors)
        signs[factor] = -1.0
        return LatentFactorSet(innovations=self.innovations * signs[:, None], length_scales=self.length_scales, realized=self.realized * signs[:, None])


@dataclass(frozen=True)
class HeterogeneityScale:
    tau: np.ndarray
    corr: np.ndarray = field(repr=False)

    @property
    def sigma_omega(self) -> np.ndarray:
        return compose_sigma_omega(self.tau, self.corr)


@dataclass(frozen=True)
class SensitivityPath:
    individual: int
    coefficient: int
    values: np.ndarray = field(repr=False)


def realize_factors(innovations: np.ndarray, length_scales: np.ndarray, grid: TimeGrid, jitter: Optional[float] = None) -> LatentFactorSet:
    """Map L standard-normal innovation sequences to GP(0, SE(1, rho_l)) paths through the Cholesky factor of each covariance."""
    innovations = np.atleast_2d(np.asarray(innovations, dtype=np.float64))
    length_scales = np.atleast_1d(np.asarray(length_scales, dtype=np.float64))

    if innovations.shape != (len(length_scales), len(grid)):
        raise InvalidArgumentError(f"Expected innovations of shape {(len(length_scales), len(grid))}, got {innovations.shape}.")

    realized = np.stack([
        cholesky_lower(build_covariance(grid, SEKernelParams(amplitude=1.0, length_scale=float(rho)), jitter=jitter)) @ sequence
        for sequence, rho in zip(innovations, length_scales)
    ]) if len(length_scales) else np.zeros((0, len(grid)))

    return LatentFactorSet(innovations=innovations, length_scales=length_scales, realized=realized)


def assemble_sensitivity(i: int, k: int, alpha: np.ndarray, omega: np.ndarray, factors: LatentFactorSet) -> SensitivityPath:
    """beta_ik(t) = alpha_k + sum_l omega_ikl u_l(t)."""
    if not (0 <= i < omega.shape[0] and 0 <= k < omega.shape[1]):
        raise ConsistencyError(f"Index (i={i}, k={k}) is out of range for weights of shape {omega.shape}.")

    return SensitivityPath(individual=i, coefficient=k, values=alpha[k] + omega[i, k] @ factors.realized)


def assemble_all(alpha: np.ndarray, omega: np.ndarray, realized: np.ndarray) -> np.ndarray:
    """Every sensitivity path at once, shape (I, K, T)."""
    return np.asarray(alpha)[None, :, None] + np.einsum("ikl,lt->ikt", omega, realized)


def compose_sigma_omega(tau: np.ndarray, corr: np.ndarray) -> np.ndarray:
    tau, corr = np.asarray(tau, dtype=np.float64), np.asarray(corr, dtype=np.float64)
    if np.any(tau <= 0):
        raise InvalidArgumentError(f"Heterogeneity scales must be positive, got {tau.tolist()}.")

    return tau[:, None] * corr * tau[None, :]


class McdhModel(ChoiceModel, kind=Enums.ModelKind.MCDH):
    """
    Sensitivities built from L shared latent GP factors: beta_ik(t) = alpha_k + sum_l omega_ikl u_l(t).
    Weight rows omega_il are N(0, diag(tau) Lambda diag(tau)) and are sampled non-centered, as are the factors.
    """

    def _blocks(self) -> list[ParameterBlock]:
        dims = self.dims
        return [
            ParameterBlock("innovations", (dims.L, dims.T)),
            ParameterBlock("log_length_scales", (dims.L,)),
            ParameterBlock("alpha", (dims.K,)),
            ParameterBlock("omega_raw", (dims.I, dims.K, dims.L)),
            ParameterBlock("log_tau", (dims.K,)),
            ParameterBlock("corr_unconstrained", (n_partial_correlations(dims.K),)),
        ]

    def _factors_traced(self, innovations: jnp.ndarray, log_length_scales: jnp.ndarray) -> jnp.ndarray:
        if not self.dims.L:
            return jnp.zeros((0, self.dims.T))

        return jnp.stack([
            se_cholesky_traced(self.grid.points, jnp.exp(log_length_scales[factor]), jitter=self.priors.jitter) @ innovations[factor]
            for factor in range(self.dims.L)
        ])

    def _weights_traced(self, omega_raw: jnp.ndarray, log_tau: jnp.ndarray, corr_factor: jnp.ndarray) -> jnp.ndarray:
        scale_factor = jnp.exp(log_tau)[:, None] * corr_factor
        return jnp.einsum("kj,ijl->ikl", scale_factor, omega_raw)

    def evaluate(self, blocks: dict[str, jnp.ndarray]) -> tuple[jnp.ndarray, jnp.ndarray]:
        priors = self.priors
        corr_factor, corr_log_jacobian = corr_cholesky_from_unconstrained(blocks["corr_unconstrained"], self.dims.K)

        log_prior = (
            jnp.sum(jstats.norm.logpdf(blocks["innovations"]))
            + jnp.sum(log_normal_log_density_of_log(blocks["log_length_scales"], priors.length_scale_median, priors.length_scale_log_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["alpha"], 0.0, priors.alpha_sd))
            + jnp.sum(jstats.norm.logpdf(blocks["omega_raw"]))
            + jnp.sum(half_normal_log_density_of_log(blocks["log_tau"], priors.tau_scale))
            + lkj_cholesky_log_density(corr_factor, priors.lkj_shape) + corr_log_jacobian
        )

        factors = self._factors_traced(blocks["innovations"], blocks["log_length_scales"])
        omega = self._weights_traced(blocks["omega_raw"], blocks["log_tau"], corr_factor)
        beta = blocks["alpha"][None, :, None] + jnp.einsum("ikl,lt->ikt", omega, factors)
        return log_prior, beta

    def _constrained_traced(self, vector: jnp.ndarray) -> dict[str, jnp.ndarray]:
        blocks = self.layout.unflatten(vector)
        corr_factor, _ = corr_cholesky_from_unconstrained(blocks["corr_unconstrained"], self.dims.K)
        tau = jnp.exp(blocks["log_tau"])
        factors = self._factors_traced(blocks["innovations"], blocks["log_length_scales"])
        omega = self._weights_traced(blocks["omega_raw"], blocks["log_tau"], corr_factor)
        corr = corr_factor @ corr_factor.T

        return {
            "innovations": blocks["innovations"],
            "length_scales": jnp.exp(blocks["log_length_scales"]),
            "alpha": blocks["alpha"],
            "omega": omega,
            "tau": tau,
            "corr": corr,
            "sigma_omega": tau[:, None] * corr * tau[None, :],
            "factors": factors,
            "beta": blocks["alpha"][None, :, None] + jnp.einsum("ikl,lt->ikt", omega, factors),
        }

    def unconstrain(self, constrained: dict[str, np.ndarray]) -> ParameterState:
        """Inverse of constrain. Needs 'factors', 'length_scales', 'alpha', 'omega', 'tau' and 'corr'."""
        dims, jitter = self.dims, self.priors.jitter
        length_scales = np.asarray(constrained["length_scales"], dtype=np.float64)
        factors = np.asarray(constrained["factors"], dtype=np.float64).reshape(dims.L, dims.T)

        innovations = np.stack([
            scipy.linalg.solve_triangular(cholesky_lower(build_covariance(self.grid, SEKernelParams(1.0, float(rho)), jitter=jitter)), path, lower=True)
            for path, rho in zip(factors, length_scales)
        ]) if dims.L else np.zeros((0, dims.T))

        tau = np.asarray(constrained["tau"], dtype=np.float64)
        corr = np.asarray(constrained["corr"], dtype=np.float64)
        scale_factor = tau[:, None] * cholesky_lower(corr)
        omega = np.asarray(constrained["omega"], dtype=np.float64).reshape(dims.I, dims.K, dims.L)
        omega_raw = np.einsum("kj,ijl->ikl", np.linalg.inv(scale_factor), omega)

        return ParameterState.from_blocks({
            "innovations": innovations,
            "log_length_scales": np.log(length_scales),
            "alpha": np.asarray(constrained["alpha"], dtype=np.float64),
            "omega_raw": omega_raw,
            "log_tau": np.log(tau),
            "corr_unconstrained": unconstrained_from_corr(corr),
        }, self.layout)

    def factor_set(self, constrained: dict[str, np.ndarray]) -> LatentFactorSet:
        return LatentFactorSet(innovations=constrained["innovations"], length_scales=constrained["length_scales"], realized=constrained["factors"])

    def extrapolate(self, constrained: dict[str, np.ndarray], new_times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        new_times = np.asarray(new_times, dtype=np.float64)
        future = np.stack([
            gp_extrapolate(path, self.grid, new_times, params=SEKernelParams(1.0, float(rho)), rng=rng, jitter=self.priors.jitter).draw
            for path, rho in zip(constrained["factors"], constrained["length_scales"])
        ]) if self.dims.L else np.zeros((0, len(new_times)))

        return assemble_all(constrained["alpha"], constrained["omega"], future)
