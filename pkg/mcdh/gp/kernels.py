from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np
import jax.numpy as jnp
import scipy.linalg

from mcdh.errors import InvalidArgumentError, NumericalInstabilityError

logger = logging.getLogger(__name__)


class Settings:
    relative_jitter = 1e-8
    max_relative_jitter = 1e-4
    jitter_growth = 10.0


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, finite time coordinates. Quarters map to consecutive integers starting at 0."""
    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64).reshape(-1)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if not len(points):
            raise InvalidArgumentError("A TimeGrid needs at least one point.")
        if not np.all(np.isfinite(points)):
            raise InvalidArgumentError(f"TimeGrid points must be finite, got {points.tolist()}.")
        if np.any(np.diff(points) <= 0):
            raise InvalidArgumentError(f"TimeGrid points must be strictly increasing, got {points.tolist()}.")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(points={self.points.tolist()})"

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterable[float]:
        return iter(self.points.tolist())

    def __getitem__(self, item: int) -> float:
        return float(self.points[item])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def head(self, count: int) -> TimeGrid:
        return type(self)(self.points[:count])

    def tail(self, count: int) -> TimeGrid:
        return type(self)(self.points[len(self.points) - count:])

    def extended(self, count: int) -> TimeGrid:
        """Return this grid followed by 'count' further unit-spaced points."""
        return type(self)(np.concatenate([self.points, self.points[-1] + np.arange(1, count + 1, dtype=np.float64)]))

    @classmethod
    def from_buckets(cls, count: int) -> TimeGrid:
        return cls(np.arange(count, dtype=np.float64))


@dataclass(frozen=True)
class SEKernelParams:
    amplitude: float
    length_scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise InvalidArgumentError(f"Kernel amplitude must be finite and strictly positive, got {self.amplitude}.")
        if not (math.isfinite(self.length_scale) and self.length_scale > 0):
            raise InvalidArgumentError(f"Kernel length scale must be finite and strictly positive, got {self.length_scale}.")


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray = field(repr=False)
    jitter_applied: float = 0.0

    def __len__(self) -> int:
        return self.entries.shape[0]


def se_kernel(t: float, t2: float, params: SEKernelParams) -> float:
    """Squared-exponential covariance sigma^2 * exp(-(t - t2)^2 / (2 rho^2))."""
    if not (math.isfinite(t) and math.isfinite(t2)):
        raise InvalidArgumentError(f"Kernel inputs must be finite, got t={t}, t2={t2}.")

    return params.amplitude**2 * math.exp(-((t - t2)**2) / (2 * params.length_scale**2))


def se_gram(left: np.ndarray, right: np.ndarray, params: SEKernelParams) -> np.ndarray:
    """Cross-covariance matrix between two sets of time coordinates."""
    deltas = np.subtract.outer(np.asarray(left, dtype=np.float64), np.asarray(right, dtype=np.float64))
    return params.amplitude**2 * np.exp(-(deltas**2) / (2 * params.length_scale**2))


def build_covariance(grid: TimeGrid, params: SEKernelParams, jitter: Optional[float] = None) -> CovarianceMatrix:
    """
    Assemble the SE covariance over the grid with 'jitter' added to the diagonal (default 1e-8 * sigma^2).
    If the result does not factorize, the jitter escalates tenfold until 1e-4 * sigma^2 before giving up.
    """
    if jitter is not None and not (math.isfinite(jitter) and jitter >= 0):
        raise InvalidArgumentError(f"Jitter must be finite and nonnegative, got {jitter}.")

    gram = se_gram(grid.points, grid.points, params)
    _, applied = factorize_with_jitter(gram, scale=params.amplitude**2, jitter=jitter, context=f"grid {grid.points.tolist()} with {params}")
    return CovarianceMatrix(entries=gram + applied * np.eye(len(grid)), jitter_applied=applied)


def factorize_with_jitter(entries: np.ndarray, scale: float = 1.0, jitter: Optional[float] = None, context: str = "a covariance matrix") -> tuple[np.ndarray, float]:
    """Cholesky-factorize entries + jitter * I, escalating the jitter tenfold from 1e-8 * scale up to 1e-4 * scale. Returns (factor, jitter applied)."""
    floor, ceiling = Settings.relative_jitter * scale, Settings.max_relative_jitter * scale
    current = floor if jitter is None else jitter

    while True:
        try:
            return scipy.linalg.cholesky(entries + current * np.eye(entries.shape[0]), lower=True), current
        except scipy.linalg.LinAlgError:
            if current >= ceiling:
                raise NumericalInstabilityError(f"Matrix is not positive definite even with jitter {current:g} for {context}.")

            current = min(max(current * Settings.jitter_growth, floor), ceiling)
            logger.warning(f"Escalating covariance jitter to {current:g} for {context}.")


def cholesky_lower(m: Union[CovarianceMatrix, np.ndarray]) -> np.ndarray:
    """Lower-triangular Cholesky factor L with L @ L.T == m."""
    entries = m.entries if isinstance(m, CovarianceMatrix) else np.asarray(m, dtype=np.float64)

    try:
        return scipy.linalg.cholesky(entries, lower=True)
    except (scipy.linalg.LinAlgError, ValueError) as ex:
        raise NumericalInstabilityError(f"Cholesky factorization failed for a {entries.shape[0]}x{entries.shape[0]} matrix: {ex}.")


def se_cholesky_traced(points: np.ndarray, length_scale: jnp.ndarray, amplitude: Union[float, jnp.ndarray] = 1.0, jitter: float = Settings.relative_jitter) -> jnp.ndarray:
    """Differentiable Cholesky factor of the SE covariance, for use inside jit-compiled densities. Jitter is relative to amplitude^2."""
    deltas = jnp.subtract.outer(jnp.asarray(points), jnp.asarray(points))
    variance = amplitude**2
    gram = variance * jnp.exp(-(deltas**2) / (2 * length_scale**2)) + jitter * variance * jnp.eye(len(points))
    return jnp.linalg.cholesky(gram)
