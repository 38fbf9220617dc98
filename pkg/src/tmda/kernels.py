"""Linear and Gaussian (rbf) kernel construction.

Data matrices are column-major throughout: a d x n array holds n points of
dimension d. Self kernel matrices are made exactly symmetric by computing the
upper triangle and mirroring it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._arrays import as_columns, mirror_upper, pairwise_sqdist
from .errors import DegenerateDataError, ValidationError

KERNEL_KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Declared kernel: ``linear`` or ``rbf``.

    For rbf, ``bandwidth`` is the squared-distance scale gamma in
    k(x, y) = exp(-gamma * ||x - y||^2). A bandwidth of None defers the
    choice; call :func:`resolve_bandwidth` (median heuristic) before building
    a kernel matrix.
    """

    kind: str
    bandwidth: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "linear" and self.bandwidth is not None:
            raise ValidationError("linear kernel takes no bandwidth")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValidationError("rbf bandwidth must be positive")


def median_bandwidth(X) -> float:
    """Bandwidth gamma = 1 / median pairwise squared distance (zeros excluded).

    Raises DegenerateDataError when every pairwise distance is zero.
    """
    cols = as_columns(X)
    n = cols.shape[1]
    if n < 2:
        raise ValidationError("median bandwidth needs at least 2 points")
    d2 = pairwise_sqdist(cols, cols)
    iu = np.triu_indices(n, 1)
    vals = d2[iu]
    vals = vals[vals > 0]
    if vals.size == 0:
        raise DegenerateDataError("all pairwise distances are zero")
    return float(1.0 / np.median(vals))


def resolve_bandwidth(spec: KernelSpec, X) -> KernelSpec:
    """Fill in a missing rbf bandwidth using the median heuristic."""
    if spec.kind == "rbf" and spec.bandwidth is None:
        return replace(spec, bandwidth=median_bandwidth(X))
    return spec


def kernel_matrix(X, spec: KernelSpec) -> np.ndarray:
    """n x n Gram matrix of the columns of X under ``spec``.

    The result is exactly symmetric; for rbf the diagonal is exactly 1.
    """
    cols = as_columns(X)
    if cols.shape[1] < 1:
        raise ValidationError("kernel matrix needs at least one point")
    if spec.kind == "linear":
        return mirror_upper(cols.T @ cols)
    if spec.bandwidth is None:
        raise ValidationError("rbf bandwidth unset; use resolve_bandwidth first")
    K = np.exp(-spec.bandwidth * pairwise_sqdist(cols, cols))
    np.fill_diagonal(K, 1.0)
    return mirror_upper(K)


def kernel_cross(X, Y, spec: KernelSpec) -> np.ndarray:
    """Kernel evaluations between columns of X (rows) and columns of Y."""
    xc = as_columns(X)
    yc = as_columns(Y)
    if xc.shape[0] != yc.shape[0]:
        raise ValidationError(
            f"feature dimensions differ: {xc.shape[0]} vs {yc.shape[0]}"
        )
    if spec.kind == "linear":
        return xc.T @ yc
    if spec.bandwidth is None:
        raise ValidationError("rbf bandwidth unset; use resolve_bandwidth first")
    return np.exp(-spec.bandwidth * pairwise_sqdist(xc, yc))
