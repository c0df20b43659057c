from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mcdh.errors import InvalidArgumentError


@dataclass(frozen=True)
class MacroMetrics:
    """
    One-vs-rest precision, recall and specificity per brand, averaged without weights. A brand never predicted scores 0
    precision, a brand never chosen scores 0 recall. Specificity is undefined for a brand when every occasion chose it;
    such brands are flagged in 'specificity_defined' and left out of the macro average.
    """
    precision: float
    recall: float
    specificity: float
    per_brand_precision: np.ndarray = field(repr=False)
    per_brand_recall: np.ndarray = field(repr=False)
    per_brand_specificity: np.ndarray = field(repr=False)
    specificity_defined: np.ndarray = field(repr=False)


def confusion_matrix(actual: np.ndarray, predicted: np.ndarray, n_brands: int) -> np.ndarray:
    """Counts with actual brands in rows and predicted brands in columns."""
    actual, predicted = np.asarray(actual, dtype=np.int64), np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise InvalidArgumentError(f"actual and predicted must have equal shapes, got {actual.shape} and {predicted.shape}.")
    if actual.size and (min(actual.min(), predicted.min()) < 0 or max(actual.max(), predicted.max()) >= n_brands):
        raise InvalidArgumentError(f"Brand indices must lie in [0, {n_brands}).")

    confusion = np.zeros((n_brands, n_brands), dtype=np.int64)
    np.add.at(confusion, (actual, predicted), 1)
    return confusion


def macro_metrics(confusion: np.ndarray) -> MacroMetrics:
    """Per-brand and macro-averaged precision, recall and specificity. Every macro average is NaN for an empty matrix."""
    confusion = np.asarray(confusion, dtype=np.float64)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise InvalidArgumentError(f"A confusion matrix must be square, got shape {confusion.shape}.")
    if np.any(confusion < 0):
        raise InvalidArgumentError("Confusion counts must be non-negative.")

    total = confusion.sum()
    true_positive = np.diag(confusion)
    predicted_positive = confusion.sum(axis=0)
    actual_positive = confusion.sum(axis=1)
    false_positive = predicted_positive - true_positive
    true_negative = total - actual_positive - false_positive
    actual_negative = total - actual_positive

    precision = np.divide(true_positive, predicted_positive, out=np.zeros_like(true_positive), where=predicted_positive > 0)
    recall = np.divide(true_positive, actual_positive, out=np.zeros_like(true_positive), where=actual_positive > 0)
    defined = actual_negative > 0
    specificity = np.divide(true_negative, actual_negative, out=np.full_like(true_positive, np.nan), where=defined)

    return MacroMetrics(
        precision=float(precision.mean()) if total > 0 else float("nan"),
        recall=float(recall.mean()) if total > 0 else float("nan"),
        specificity=float(specificity[defined].mean()) if defined.any() else float("nan"),
        per_brand_precision=precision, per_brand_recall=recall, per_brand_specificity=specificity, specificity_defined=defined,
    )


def hit_rate(actual: np.ndarray, predicted: np.ndarray) -> float:
    """Fraction of occasions whose predicted brand is the chosen one. NaN for no occasions."""
    actual, predicted = np.asarray(actual), np.asarray(predicted)
    return float(np.mean(actual == predicted)) if actual.size else float("nan")
