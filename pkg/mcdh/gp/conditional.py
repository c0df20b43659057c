from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from mcdh.errors import InvalidArgumentError
from .kernels import TimeGrid, SEKernelParams, se_gram, factorize_with_jitter, Settings


@dataclass(frozen=True)
class ConditionalGP:
    """Conditional Gaussian of a GP at new times given its values on a training grid."""
    new_times: np.ndarray = field(repr=False)
    mean: np.ndarray = field(repr=False)
    covariance: np.ndarray = field(repr=False)
    draw: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def variance(self) -> np.ndarray:
        return np.diag(self.covariance)


def gp_extrapolate(values: np.ndarray, grid: TimeGrid, new_times: np.ndarray, params: SEKernelParams = SEKernelParams(1.0, 1.0),
                   rng: Optional[np.random.Generator] = None, train_mean: Optional[np.ndarray] = None, new_mean: Optional[np.ndarray] = None,
                   jitter: float = Settings.relative_jitter) -> ConditionalGP:
    """
    Condition GP(m, SE(params)) on 'values' observed over 'grid' and return the conditional at 'new_times'.
    The prior mean is zero unless 'train_mean' and 'new_mean' are given. When an rng is supplied one conditional draw is included.
    'values' may also be a (n, T) batch of paths sharing the kernel, in which case means and draws are (n, H).
    """
    values = np.asarray(values, dtype=np.float64)
    new_times = np.atleast_1d(np.asarray(new_times, dtype=np.float64))
    if values.shape[-1:] != (len(grid),) or values.ndim > 2:
        raise InvalidArgumentError(f"Expected {len(grid)} training values to match the grid, got shape {values.shape}.")
    if not np.all(np.isfinite(new_times)):
        raise InvalidArgumentError(f"Extrapolation times must be finite, got {new_times.tolist()}.")

    train_mean = np.zeros(len(grid)) if train_mean is None else np.asarray(train_mean, dtype=np.float64)
    new_mean = np.zeros(len(new_times)) if new_mean is None else np.asarray(new_mean, dtype=np.float64)

    variance = params.amplitude**2
    train_factor, _ = factorize_with_jitter(se_gram(grid.points, grid.points, params), scale=variance, jitter=jitter * variance, context=f"training grid with {params}")
    cross = se_gram(new_times, grid.points, params)

    weights = scipy.linalg.cho_solve((train_factor, True), cross.T)
    mean = new_mean + (values - train_mean) @ weights
    covariance = se_gram(new_times, new_times, params) - cross @ weights
    covariance = (covariance + covariance.T) / 2

    draw = None
    if rng is not None:
        factor, _ = factorize_with_jitter(covariance, scale=variance, jitter=jitter * variance, context=f"conditional covariance with {params}")
        draw = mean + rng.standard_normal(mean.shape) @ factor.T

    return ConditionalGP(new_times=new_times, mean=mean, covariance=covariance, draw=draw)
