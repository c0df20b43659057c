from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from mcdh.errors import InvalidArgumentError


@dataclass(frozen=True)
class FactorAlignment:
    """
    Match of estimated factors to true ones. Estimated factor permutation[l] with sign signs[l] corresponds to true factor l,
    with absolute Pearson correlation correlations[l].
    """
    permutation: np.ndarray
    signs: np.ndarray
    correlations: np.ndarray = field(repr=False)

    def apply(self, estimated: np.ndarray) -> np.ndarray:
        """Reorder and re-sign estimated paths (L, ...) into the order of the truth."""
        estimated = np.asarray(estimated, dtype=np.float64)
        return estimated[self.permutation] * self.signs.reshape((-1,) + (1,) * (estimated.ndim - 1))


def _abs_safe_correlation(estimated: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Signed Pearson correlation of every (truth, estimated) pair; constant paths correlate 0 with everything."""
    estimated = estimated - estimated.mean(axis=1, keepdims=True)
    truth = truth - truth.mean(axis=1, keepdims=True)
    norms = np.outer(np.linalg.norm(truth, axis=1), np.linalg.norm(estimated, axis=1))
    return np.divide(truth @ estimated.T, norms, out=np.zeros_like(norms), where=norms > 0)


def align_factors(estimated: np.ndarray, truth: np.ndarray) -> FactorAlignment:
    """Permutation and signs maximizing the summed absolute correlation between estimated and true factor paths."""
    estimated, truth = np.atleast_2d(np.asarray(estimated, dtype=np.float64)), np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if estimated.shape != truth.shape:
        raise InvalidArgumentError(f"Estimated and true factors must have equal shapes (L, T), got {estimated.shape} and {truth.shape}.")

    correlation = _abs_safe_correlation(estimated, truth)
    rows, columns = scipy.optimize.linear_sum_assignment(-np.abs(correlation))
    permutation = columns[np.argsort(rows)]
    matched = correlation[np.arange(len(permutation)), permutation]

    return FactorAlignment(permutation=permutation, signs=np.where(matched < 0, -1.0, 1.0), correlations=np.abs(matched))
