"""Input validation helpers shared by the metric functions and estimators."""

import numpy as np

from .errors import DataError, ShapeError


def as_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce an array-like or EmbeddingSet to a validated float64 matrix.

    The result is C-contiguous, 2-D with at least one row and column, and
    contains only finite values. float32 input is widened; float64 input that
    already satisfies the layout is passed through without copying.
    """
    data = X.data if hasattr(X, "label") and hasattr(X, "data") else X
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D matrix, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and one column, got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number) or np.issubdtype(arr.dtype, np.complexfloating):
        raise DataError(f"{name} must hold real numbers, got dtype {arr.dtype}")
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        i, j = map(int, np.argwhere(~np.isfinite(arr))[0])
        raise DataError(f"{name} has a non-finite entry at row {i}, column {j}")
    return arr


def check_same_features(P: np.ndarray, Q: np.ndarray, names=("P", "Q")) -> None:
    if P.shape[1] != Q.shape[1]:
        raise ShapeError(
            f"{names[0]} has {P.shape[1]} feature columns but {names[1]} has {Q.shape[1]}"
        )


def check_min_rows(X: np.ndarray, n: int, name: str = "X") -> None:
    if X.shape[0] < n:
        raise DataError(f"{name} needs at least {n} rows, got {X.shape[0]}")
