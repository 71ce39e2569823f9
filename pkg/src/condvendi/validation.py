"""Input validation helpers, in the spirit of sklearn.utils.validation.

Every public entry point funnels raw user input through these checks so the
numerical core can assume finite float64 matrices.
"""

import numpy as np

from .errors import DataError, ParamError

__all__ = [
    "check_matrix",
    "check_positive",
    "check_alpha",
    "check_labels",
]


def check_matrix(data, name="data"):
    """Coerce ``data`` to a finite float64 2-D array with n >= 1 rows, d >= 1 columns.

    Raises
    ------
    DataError
        If the array is empty, not 2-D, or contains NaN/Inf (the first
        offending (row, col) index is reported).
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"{name} is empty: shape={arr.shape}")
    if not np.isfinite(arr).all():
        row, col = np.argwhere(~np.isfinite(arr))[0]
        raise DataError(f"{name} has non-finite entry at row {row}, col {col}")
    return arr


def check_positive(value, name):
    """Validate a strictly positive finite scalar."""
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParamError(f"{name} must be a positive finite number, got {value}")
    return value


def check_alpha(alpha):
    """Validate an entropy order alpha > 0 (alpha == 1 allowed)."""
    return check_positive(alpha, "alpha")


def check_labels(labels, n):
    """Validate group labels: integer vector of length n, values exactly {1..m}.

    Returns the labels as an int64 array. Every class in 1..max(labels) must
    be non-empty.
    """
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise DataError(f"labels must be a length-{n} vector, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(np.int64)
        if not np.array_equal(as_int, arr):
            raise DataError("labels must be integers")
        arr = as_int
    arr = arr.astype(np.int64)
    if arr.min() < 1:
        raise DataError(f"labels must be >= 1, got {arr.min()}")
    m = int(arr.max())
    present = np.unique(arr)
    if len(present) != m:
        missing = sorted(set(range(1, m + 1)) - set(present.tolist()))
        raise DataError(f"label classes {missing} are empty (labels must cover 1..{m})")
    return arr
