"""Empirical two-sample discrepancies over a joint source/target kernel matrix.

The joint matrix stacks source columns first, then target columns. The global
discrepancy is the standard squared mean-embedding gap; the per-manifold
variant averages that gap over the manifolds a clustering exposes, and has an
equivalent trace form through fixed coefficient matrices (one per manifold).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePartitionError, ValidationError

log = logging.getLogger(__name__)

# Floating-point symmetry noise can push a mathematically zero discrepancy
# slightly negative; values in [-CLAMP_EPS, 0) are snapped to 0.
CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class DomainSplit:
    """Column layout of a joint matrix X = [X_source, X_target]."""

    n_source: int
    n_target: int

    def __post_init__(self):
        if self.n_source < 1 or self.n_target < 1:
            raise ValidationError("both domains need at least one point")

    @property
    def n(self) -> int:
        return self.n_source + self.n_target

    @property
    def source_index(self) -> np.ndarray:
        return np.arange(self.n_source)

    @property
    def target_index(self) -> np.ndarray:
        return np.arange(self.n_source, self.n)


@dataclass
class DiscrepancyCoefficients:
    """Per-manifold coefficient matrices for the trace form.

    ``matrices[m]`` is the n x n block matrix of manifold m + 1; manifolds
    missing a source or target member are flagged inactive and zeroed.
    """

    matrices: list
    active: np.ndarray

    @property
    def n_manifolds(self) -> int:
        return len(self.matrices)

    @property
    def n_active(self) -> int:
        return int(np.sum(self.active))

    def total(self) -> np.ndarray:
        """Plain sum of the coefficient matrices (inactive ones are zero)."""
        return np.sum(self.matrices, axis=0)


def _clamp(value: float) -> float:
    if -CLAMP_EPS <= value < 0.0:
        return 0.0
    return float(value)


def _as_kernel_array(K) -> np.ndarray:
    arr = np.asarray(getattr(K, "values", K), dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("kernel matrix must be square")
    return arr


def _check_labels(labels, n: int, n_manifolds: int | None) -> tuple[np.ndarray, int]:
    lab = np.asarray(labels, dtype=int).ravel()
    if lab.shape[0] != n:
        raise ValidationError(f"assignment length {lab.shape[0]} != n = {n}")
    if lab.min() < 1:
        raise ValidationError("manifold labels must start at 1")
    count = int(lab.max()) if n_manifolds is None else int(n_manifolds)
    if count < 1 or lab.max() > count:
        raise ValidationError("manifold label out of range")
    return lab, count


def empirical_mmd(K, split: DomainSplit) -> float:
    """Squared mean-embedding gap between source and target samples.

    Computed from the three blocks of the joint kernel matrix; tiny negative
    results from floating-point noise are clamped to zero.
    """
    arr = _as_kernel_array(K)
    if arr.shape[0] != split.n:
        raise ValidationError(
            f"kernel size {arr.shape[0]} does not match split n = {split.n}"
        )
    s = slice(0, split.n_source)
    t = slice(split.n_source, split.n)
    value = arr[s, s].mean() + arr[t, t].mean() - 2.0 * arr[s, t].mean()
    return _clamp(value)


def empirical_m3d(K, split: DomainSplit, labels, n_manifolds: int | None = None) -> float:
    """Average per-manifold mean-embedding gap.

    Manifolds with no source or no target member contribute nothing and are
    excluded from the divisor; the number skipped is logged. Raises
    DegeneratePartitionError when no manifold spans both domains.
    """
    arr = _as_kernel_array(K)
    if arr.shape[0] != split.n:
        raise ValidationError(
            f"kernel size {arr.shape[0]} does not match split n = {split.n}"
        )
    lab, count = _check_labels(labels, split.n, n_manifolds)
    src_lab = lab[: split.n_source]
    tgt_lab = lab[split.n_source :]
    total = 0.0
    active = 0
    for m in range(1, count + 1):
        src = np.flatnonzero(src_lab == m)
        tgt = split.n_source + np.flatnonzero(tgt_lab == m)
        if src.size == 0 or tgt.size == 0:
            continue
        term = (
            arr[np.ix_(src, src)].mean()
            + arr[np.ix_(tgt, tgt)].mean()
            - 2.0 * arr[np.ix_(src, tgt)].mean()
        )
        total += _clamp(term)
        active += 1
    skipped = count - active
    if active == 0:
        raise DegeneratePartitionError(
            "no manifold has members in both source and target"
        )
    if skipped:
        log.info("per-manifold discrepancy skipped %d empty-sided manifold(s)", skipped)
    return _clamp(total / active)


def build_coefficients(
    split: DomainSplit, labels, n_manifolds: int | None = None
) -> DiscrepancyCoefficients:
    """Coefficient matrices M for the trace form, one per manifold.

    Each active matrix is the rank-one outer product u u^T with u = 1/n_s^m on
    the manifold's source members and -1/n_t^m on its target members, so its
    entries follow the four-case block rule and sum to zero.
    """
    lab, count = _check_labels(labels, split.n, n_manifolds)
    src_lab = lab[: split.n_source]
    tgt_lab = lab[split.n_source :]
    matrices = []
    active = np.zeros(count, dtype=bool)
    for m in range(1, count + 1):
        src = np.flatnonzero(src_lab == m)
        tgt = split.n_source + np.flatnonzero(tgt_lab == m)
        if src.size == 0 or tgt.size == 0:
            matrices.append(np.zeros((split.n, split.n)))
            continue
        u = np.zeros(split.n)
        u[src] = 1.0 / src.size
        u[tgt] = -1.0 / tgt.size
        matrices.append(np.outer(u, u))
        active[m - 1] = True
    return DiscrepancyCoefficients(matrices=matrices, active=active)


def feature_m3d(F, coeffs: DiscrepancyCoefficients) -> float:
    """Trace-form discrepancy of explicit features F (one column per point)."""
    feats = np.asarray(F, dtype=float)
    if coeffs.n_active == 0:
        raise DegeneratePartitionError("no active manifold in coefficients")
    total = 0.0
    for M, act in zip(coeffs.matrices, coeffs.active):
        if not act:
            continue
        total += _clamp(float(np.trace(feats @ M @ feats.T)))
    return _clamp(total / coeffs.n_active)
