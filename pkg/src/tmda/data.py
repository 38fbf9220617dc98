"""Datasets: synthetic multi-manifold tasks, text matrix I/O, dimension MLE.

The on-disk matrix format is plain text for diff-ability: a ``rows cols``
header line, then one space-separated row per line, every value printed with
17 significant digits so a write/read round trip is value-exact. Label files
hold one integer per line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._arrays import pairwise_sqdist
from .errors import ParseError, ValidationError


@dataclass
class Dataset:
    """A d x n column matrix of points with optional integer labels."""

    X: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValidationError("dataset matrix must be 2-D (columns are points)")
        if not np.isfinite(self.X).all():
            raise ValidationError("dataset matrix contains non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int).ravel()
            if self.labels.shape[0] != self.X.shape[1]:
                raise ValidationError(
                    f"label count {self.labels.shape[0]} != point count {self.X.shape[1]}"
                )

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings for the multi-manifold transfer benchmark."""

    n_manifolds: int = 5
    ambient_dim: int = 100
    manifold_dim: int = 10
    points_per_manifold: int = 40
    source_mean: float = 0.05
    target_mean: float = -0.05
    sampling_std: float = 0.1
    corrupt_fraction: float = 0.05
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_manifolds < 1:
            raise ValidationError("need at least one manifold")
        if not 0 < self.manifold_dim < self.ambient_dim:
            raise ValidationError("manifold_dim must lie in (0, ambient_dim)")
        if self.points_per_manifold < 1:
            raise ValidationError("need at least one point per manifold")
        if not 0.0 <= self.corrupt_fraction <= 1.0:
            raise ValidationError("corrupt_fraction must be in [0, 1]")
        if self.sampling_std < 0 or self.noise_std < 0:
            raise ValidationError("standard deviations must be nonnegative")


@dataclass
class TransferTask:
    """A labeled source domain plus a target domain with held-out labels."""

    source: Dataset
    target: Dataset
    target_labels: np.ndarray


def _sample_domain(bases, mean, std, points, rng):
    blocks = [U @ rng.normal(mean, std, size=(U.shape[1], points)) for U in bases]
    return np.hstack(blocks)


def _corrupt(X, fraction, noise_std, rng):
    count = int(round(fraction * X.shape[1]))
    if count == 0 or noise_std == 0:
        return X
    idx = rng.choice(X.shape[1], size=count, replace=False)
    X[:, idx] += rng.normal(0.0, noise_std, size=(X.shape[0], count))
    return X


def generate_synthetic(cfg: SynthConfig) -> TransferTask:
    """Draw a seeded transfer task from shared low-dimensional manifolds.

    The first basis is the orthonormal factor of a Gaussian matrix; each
    further basis is the previous one turned by a single random rotation
    (determinant +1) drawn once per task. Source and target sample the same
    manifolds with different coordinate means, and a fraction of points per
    domain receives additive ambient Gaussian noise. Labels are the manifold
    indices 1..N; target labels are returned separately as ground truth.
    """
    rng = np.random.default_rng(cfg.seed)
    d, md = cfg.ambient_dim, cfg.manifold_dim

    U, _ = np.linalg.qr(rng.standard_normal((d, md)))
    T, _ = np.linalg.qr(rng.standard_normal((d, d)))
    if np.linalg.det(T) < 0:
        T[:, 0] = -T[:, 0]
    bases = [U]
    for _ in range(cfg.n_manifolds - 1):
        bases.append(T @ bases[-1])

    Xs = _sample_domain(bases, cfg.source_mean, cfg.sampling_std, cfg.points_per_manifold, rng)
    Xt = _sample_domain(bases, cfg.target_mean, cfg.sampling_std, cfg.points_per_manifold, rng)
    Xs = _corrupt(Xs, cfg.corrupt_fraction, cfg.noise_std, rng)
    Xt = _corrupt(Xt, cfg.corrupt_fraction, cfg.noise_std, rng)

    labels = np.repeat(np.arange(1, cfg.n_manifolds + 1), cfg.points_per_manifold)
    return TransferTask(
        source=Dataset(Xs, labels.copy()),
        target=Dataset(Xt, None),
        target_labels=labels.copy(),
    )


def format_value(x: float) -> str:
    """Render a float with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def write_matrix(path, data) -> None:
    """Write a matrix (or Dataset) in the text format described above."""
    mat = np.asarray(getattr(data, "X", data), dtype=float)
    if mat.ndim != 2:
        raise ValidationError("can only write 2-D matrices")
    if not np.isfinite(mat).all():
        raise ValidationError("refusing to write non-finite values")
    with open(path, "w") as fh:
        _write_matrix_block(fh, mat)


def _write_matrix_block(fh, mat: np.ndarray) -> None:
    fh.write(f"{mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        fh.write(" ".join(format_value(v) for v in row))
        fh.write("\n")


def read_matrix(path) -> Dataset:
    """Parse a matrix file; raises ParseError with the offending line number."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    mat, _ = _read_matrix_block(lines, 0)
    for extra, text in enumerate(lines[1 + mat.shape[0] :], start=2 + mat.shape[0]):
        if text.strip():
            raise ParseError("unexpected content after matrix rows", line=extra)
    return Dataset(mat)


def _read_matrix_block(lines, start: int):
    """Parse header plus rows beginning at ``lines[start]``; returns (matrix, next)."""
    if start >= len(lines) or not lines[start].strip():
        raise ParseError("missing matrix header 'rows cols'", line=start + 1)
    header = lines[start].split()
    if len(header) != 2:
        raise ParseError("matrix header must be 'rows cols'", line=start + 1)
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("matrix header must hold two integers", line=start + 1)
    if rows < 0 or cols < 1:
        raise ParseError("matrix dimensions must be positive", line=start + 1)
    mat = np.empty((rows, cols))
    for r in range(rows):
        lineno = start + 2 + r
        if start + 1 + r >= len(lines):
            raise ParseError(f"row {r + 1}: unexpected end of file", line=lineno)
        tokens = lines[start + 1 + r].split()
        if len(tokens) != cols:
            raise ParseError(
                f"row {r + 1}: expected {cols} values, found {len(tokens)}", line=lineno
            )
        try:
            mat[r] = [float(tok) for tok in tokens]
        except ValueError:
            raise ParseError(f"row {r + 1}: non-numeric value", line=lineno)
    return mat, start + 1 + rows


def write_labels(path, labels) -> None:
    lab = np.asarray(labels, dtype=int).ravel()
    with open(path, "w") as fh:
        for v in lab:
            fh.write(f"{int(v)}\n")


def read_labels(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().splitlines()
    values = []
    for i, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            values.append(int(text))
        except ValueError:
            raise ParseError(f"labels must be integers, got {text!r}", line=i)
    if not values:
        raise ParseError("empty labels file", line=1)
    return np.asarray(values, dtype=int)


def estimate_intrinsic_dim(X, k_neighbors: int) -> float:
    """Nearest-neighbor maximum-likelihood estimate of intrinsic dimension.

    For each point the inverse local estimate is the mean over j < k of
    log(T_k / T_j), T_j being the distance to the j-th nearest neighbor
    (self excluded); the global estimate inverts the average of those
    inverses. Zero distances are raised to 1e-12 before the logs, so
    duplicated points never produce NaN.
    """
    cols = np.asarray(getattr(X, "X", X), dtype=float)
    n = cols.shape[1]
    if k_neighbors < 2:
        raise ValidationError("k_neighbors must be at least 2")
    if n <= k_neighbors:
        raise ValidationError(f"need more than {k_neighbors} points, got {n}")
    d2 = pairwise_sqdist(cols, cols)
    np.fill_diagonal(d2, np.inf)
    dist = np.sqrt(np.sort(d2, axis=1)[:, :k_neighbors])
    dist = np.maximum(dist, 1e-12)
    inv_local = np.mean(np.log(dist[:, -1:] / dist[:, :-1]), axis=1)
    mean_inv = float(np.mean(inv_local))
    if mean_inv == 0.0:
        return float("inf")
    return 1.0 / mean_inv


def subspace_dim_from_mle(X, k_neighbors: int) -> int:
    """Round the MLE estimate and clamp it to [1, ambient dimension]."""
    cols = np.asarray(getattr(X, "X", X), dtype=float)
    est = estimate_intrinsic_dim(cols, k_neighbors)
    return int(np.clip(np.round(est), 1, cols.shape[0]))
