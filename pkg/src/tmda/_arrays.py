"""Small array helpers used across modules."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_columns(data) -> np.ndarray:
    """Return a finite, 2-D float64 column matrix from an array or Dataset."""
    mat = np.asarray(getattr(data, "X", data), dtype=float)
    if mat.ndim != 2:
        raise ValidationError(f"expected a 2-D column matrix, got ndim={mat.ndim}")
    if not np.isfinite(mat).all():
        raise ValidationError("input matrix contains non-finite entries")
    return mat


def pairwise_sqdist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between columns of X and columns of Y."""
    xx = np.sum(X * X, axis=0)[:, None]
    yy = np.sum(Y * Y, axis=0)[None, :]
    d2 = xx + yy - 2.0 * (X.T @ Y)
    np.maximum(d2, 0.0, out=d2)
    return d2


def mirror_upper(K: np.ndarray) -> np.ndarray:
    """Force exact symmetry by reflecting the upper triangle onto the lower."""
    upper = np.triu(K, 1)
    return upper + upper.T + np.diag(np.diag(K))
