"""Feature filtering and normalization for descriptor matrices.

Pipeline order mirrors the training protocol: variance threshold on raw
values, then greedy correlation deduplication (earlier column wins), then
standardization with statistics fitted on the training split only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..base import BaseEstimator, check_matrix
from ..exceptions import DataError, NumericError

EPS = 1e-6  # sigma guard from the normalization definition


def variance_filter(matrix, threshold: float = 0.01) -> list[int]:
    """Indices of columns whose population variance is >= threshold."""
    X = check_matrix(matrix, "matrix", min_rows=2)
    variances = X.var(axis=0)  # ddof=0
    return [int(j) for j in np.flatnonzero(variances >= threshold)]


def correlation_filter(matrix, threshold: float = 0.9) -> list[int]:
    """Greedy left-to-right deduplication on |pearson r| > threshold.

    Column j is dropped iff some earlier *retained* column correlates with
    it beyond the threshold, so the earliest member of each correlated
    group survives. Zero-variance columns violate the precondition (they
    should have been variance-filtered) and raise NumericError.
    """
    X = check_matrix(matrix, "matrix", min_rows=2)
    stds = X.std(axis=0)
    degenerate = np.flatnonzero(stds == 0.0)
    if degenerate.size:
        raise NumericError(
            f"columns {degenerate.tolist()} have zero variance; "
            "run the variance filter first"
        )
    if X.shape[1] == 0:
        return []
    corr = np.corrcoef(X, rowvar=False)
    corr = np.atleast_2d(corr)
    kept: list[int] = []
    for j in range(X.shape[1]):
        if any(abs(corr[i, j]) > threshold for i in kept):
            continue
        kept.append(j)
    return kept


@dataclass
class FeatureStats:
    """Per-feature standardization parameters over the retained columns."""

    mean: np.ndarray
    std: np.ndarray
    retained: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape:
            raise DataError("mean and std must have identical shapes")
        if np.any(self.std < 0):
            raise DataError("std must be non-negative")
        if list(self.retained) != sorted(set(self.retained)):
            raise DataError("retained indices must be strictly increasing")
        if len(self.retained) != self.mean.shape[0]:
            raise DataError("retained length must match stats length")


def fit_stats(matrix, retained: Optional[Sequence[int]] = None) -> FeatureStats:
    """Population mean/std per retained column (default: all columns)."""
    X = check_matrix(matrix, "matrix")
    if retained is None:
        retained = list(range(X.shape[1]))
    retained = [int(i) for i in retained]
    sub = X[:, retained]
    return FeatureStats(mean=sub.mean(axis=0), std=sub.std(axis=0), retained=retained)


def normalize(rows, stats: FeatureStats) -> np.ndarray:
    """(f - mean) / (std + EPS) over the retained columns of full-width rows."""
    X = check_matrix(rows, "rows")
    if X.shape[1] <= (max(stats.retained) if stats.retained else -1):
        raise DataError(
            f"rows have {X.shape[1]} columns but stats retain index "
            f"{max(stats.retained)}"
        )
    return (X[:, stats.retained] - stats.mean) / (stats.std + EPS)


def denormalize(rows, stats: FeatureStats) -> np.ndarray:
    """Inverse of normalize over already-selected columns."""
    X = check_matrix(rows, "rows")
    if X.shape[1] != len(stats.retained):
        raise DataError("denormalize expects rows over the retained columns")
    return X * (stats.std + EPS) + stats.mean


class DescriptorPipeline(BaseEstimator):
    """Variance filter -> correlation filter -> standardization.

    Fit only on training rows; transform applies the frozen column
    selection and statistics to any rows with the same schema width.
    """

    def __init__(self, variance_threshold: float = 0.01,
                 correlation_threshold: float = 0.9):
        self.variance_threshold = variance_threshold
        self.correlation_threshold = correlation_threshold

    def fit(self, X, feature_names: Optional[Sequence[str]] = None):
        X = check_matrix(X, "X", min_rows=2)
        var_kept = variance_filter(X, self.variance_threshold)
        if not var_kept:
            raise DataError("variance filter removed every column")
        corr_kept = correlation_filter(X[:, var_kept], self.correlation_threshold)
        self.retained_ = [var_kept[j] for j in corr_kept]
        self.stats_ = fit_stats(X, self.retained_)
        self.n_features_in_ = X.shape[1]
        if feature_names is not None:
            if len(feature_names) != X.shape[1]:
                raise DataError("feature_names length must match column count")
            self.feature_names_ = [feature_names[i] for i in self.retained_]
        return self

    def transform(self, X) -> np.ndarray:
        self._check_fitted("stats_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} columns, got {X.shape[1]}"
            )
        return normalize(X, self.stats_)

    def fit_transform(self, X, feature_names: Optional[Sequence[str]] = None):
        return self.fit(X, feature_names=feature_names).transform(X)
