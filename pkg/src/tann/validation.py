"""Input validation helpers for the estimator API."""

from __future__ import annotations

import numpy as np

from .datasets import Dataset
from .exceptions import ContractError


def check_feature_matrix(X) -> np.ndarray:
    """2-D float64 matrix with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ContractError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ContractError(f"feature matrix must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractError("feature matrix contains NaN or Inf")
    return X


def check_labels(y, n_rows: int) -> np.ndarray:
    """Integer label vector matching the feature row count."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise ContractError(
            f"labels must be a length-{n_rows} vector, got shape {y.shape}"
        )
    if not np.issubdtype(y.dtype, np.number):
        raise ContractError("labels must be numeric class indices")
    yi = y.astype(np.int64)
    if not np.all(yi == y):
        raise ContractError("labels must be integer class indices")
    if yi.min() < 0:
        raise ContractError("labels must be non-negative")
    return yi


def dataset_from_arrays(X, y, num_classes: int | None = None) -> Dataset:
    X = check_feature_matrix(X)
    yi = check_labels(y, X.shape[0])
    k = int(yi.max()) + 1 if num_classes is None else num_classes
    samples = [(X[i].copy(), int(yi[i])) for i in range(X.shape[0])]
    return Dataset(samples=samples, num_classes=max(k, 2), feature_width=X.shape[1])
