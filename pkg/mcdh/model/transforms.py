"""
Unconstrained parameterizations used by every model.

Correlation matrices are parameterized by K(K-1)/2 reals y. Each y is mapped through tanh to a canonical partial
correlation z in (-1, 1), and the z are assembled row by row (row-major over the strict lower triangle) into the
Cholesky factor of a correlation matrix.
"""

from __future__ import annotations

import math

import numpy as np
import jax.numpy as jnp
import jax.scipy.stats as jstats

from mcdh.errors import InvalidArgumentError
from mcdh.gp import cholesky_lower


def n_partial_correlations(size: int) -> int:
    return size * (size - 1) // 2


def corr_cholesky_from_unconstrained(y: jnp.ndarray, size: int) -> tuple[jnp.ndarray, jnp.ndarray]:
    """Cholesky factor of a correlation matrix from unconstrained reals, with the log-Jacobian of the map y -> factor."""
    if size <= 1:
        return jnp.eye(size), jnp.zeros(())

    rows, cols = np.tril_indices(size, k=-1)
    z = jnp.tanh(y)
    partial = jnp.zeros((size, size)).at[rows, cols].set(z)

    half_log_complement = 0.5 * jnp.log1p(-partial**2)
    exclusive_log_scale = jnp.cumsum(half_log_complement, axis=1) - half_log_complement
    scale = jnp.exp(exclusive_log_scale)

    factor = jnp.tril(partial * scale, k=-1) + jnp.diag(jnp.diag(scale))
    log_jacobian = jnp.sum(jnp.log1p(-z**2)) + jnp.sum(exclusive_log_scale[rows, cols])
    return factor, log_jacobian


def unconstrained_from_corr(corr: np.ndarray) -> np.ndarray:
    """Inverse of corr_cholesky_from_unconstrained composed with factor @ factor.T."""
    corr = np.asarray(corr, dtype=np.float64)
    size = corr.shape[0]
    if size <= 1:
        return np.zeros(0)

    factor = cholesky_lower(corr)
    rows, cols = np.tril_indices(size, k=-1)
    values = np.empty(len(rows))

    for position, (row, col) in enumerate(zip(rows, cols)):
        remaining = 1.0 - np.sum(factor[row, :col]**2)
        values[position] = factor[row, col] / math.sqrt(remaining)

    return np.arctanh(np.clip(values, -1 + 1e-15, 1 - 1e-15))


def lkj_cholesky_log_density(factor: jnp.ndarray, shape: float) -> jnp.ndarray:
    """
    Unnormalized LKJ(shape) log density of factor @ factor.T expressed on the Cholesky factor, i.e. including the
    Jacobian of the map factor -> correlation matrix.
    """
    size = factor.shape[0]
    if size <= 1:
        return jnp.zeros(())

    rows = np.arange(1, size)
    weights = size - rows - 1 + 2.0 * (shape - 1.0)
    return jnp.sum(weights * jnp.log(jnp.diag(factor)[1:]))


def lkj_log_density_unnormalized(corr: np.ndarray, shape: float) -> float:
    """(shape - 1) * log det(corr). The normalizing constant depends only on shape and size and is omitted."""
    if shape <= 0:
        raise InvalidArgumentError(f"The LKJ shape must be positive, got {shape}.")

    factor = cholesky_lower(np.asarray(corr, dtype=np.float64))
    return float((shape - 1.0) * 2.0 * np.sum(np.log(np.diag(factor))))


def half_normal_log_density(x, scale: float = 1.0):
    """Log density of the half-normal distribution with the given scale, for x > 0."""
    return math.log(math.sqrt(2.0 / math.pi) / scale) - x**2 / (2.0 * scale**2)


def log_normal_log_density_of_log(log_x: jnp.ndarray, median: float, log_sd: float) -> jnp.ndarray:
    """Log density of log(x) when x is log-normal; equals the log-normal density of x plus the log-Jacobian log(x)."""
    return jstats.norm.logpdf(log_x, jnp.log(median), log_sd)


def half_normal_log_density_of_log(log_x: jnp.ndarray, scale: float) -> jnp.ndarray:
    """Half-normal prior on x = exp(log_x), plus the log-Jacobian of the exp transform."""
    return half_normal_log_density(jnp.exp(log_x), scale) + log_x
