"""Alternating optimization of the projection and the affinity.

Each outer pass solves the sparse affinity with the current projection fixed,
re-exposes manifolds by spectral clustering, rebuilds the per-manifold
coefficient matrices, and updates the projection weights by a symmetric
definite generalized eigenproblem. Three modes are supported:

``full``        the alternation described above;
``global_mmd``  same alternation, but the discrepancy term uses the single
                global source-vs-target block matrix (one "manifold");
``decoupled``   one affinity solve without feature coupling, one clustering,
                one projection solve, no alternation.

The feature operator is either a kernel matrix over the joint data (linear or
rbf kernel) or, when no kernel is configured, the raw data matrix itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .data import (
    Dataset,
    format_value,
    subspace_dim_from_mle,
    _read_matrix_block,
    _write_matrix_block,
)
from .discrepancy import (
    DiscrepancyCoefficients,
    DomainSplit,
    build_coefficients,
    feature_m3d,
)
from .errors import DivergenceError, NumericalError, ParseError, ValidationError
from .kernels import KernelSpec, kernel_cross, kernel_matrix, resolve_bandwidth
from .manifolds import AdmmConfig, admm_affinity, default_mu, ncut_cluster

MODES = ("full", "global_mmd", "decoupled")

RIDGE_SCALE = 1e-6


@dataclass(frozen=True)
class TmdaConfig:
    """End-to-end solver settings.

    alpha        : weight coupling the affinity to the embedded features.
    beta         : weight of the per-manifold discrepancy term.
    n_manifolds  : manifold count; None uses the number of source classes.
    subspace_dim : embedding dimension; None uses the nearest-neighbor MLE.
    kernel       : kernel spec, or None for the raw linear-map variant.
    mode         : "full", "global_mmd" or "decoupled".
    """

    alpha: float = 0.01
    beta: float = 100.0
    n_manifolds: int | None = None
    subspace_dim: int | None = None
    kernel: KernelSpec | None = field(default_factory=lambda: KernelSpec("rbf"))
    max_outer: int = 50
    epsilon: float = 1e-6
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    seed: int = 0
    mode: str = "full"
    normalize_columns: bool = False
    mle_neighbors: int = 10

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValidationError("alpha and beta must be nonnegative")
        if self.n_manifolds is not None and self.n_manifolds < 1:
            raise ValidationError("n_manifolds must be at least 1")
        if self.subspace_dim is not None and self.subspace_dim < 1:
            raise ValidationError("subspace_dim must be at least 1")
        if self.max_outer < 1:
            raise ValidationError("max_outer must be at least 1")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.mle_neighbors < 2:
            raise ValidationError("mle_neighbors must be at least 2")


@dataclass
class TmdaModel:
    """Fitted projection plus everything needed to embed new points."""

    weights: np.ndarray
    assignment: np.ndarray
    kernel: KernelSpec | None
    train_columns: np.ndarray
    split: DomainSplit
    subspace_dim: int
    normalize_columns: bool = False
    mu: float = 0.0
    affinity: np.ndarray | None = None
    converged: bool = True
    outer_iterations: int = 0
    trace: list = field(default_factory=list)


def solve_projection(
    K,
    affinity,
    coeffs: DiscrepancyCoefficients,
    alpha: float,
    beta: float,
    k: int,
    return_eigenvalues: bool = False,
):
    """Projection weights from the generalized eigenproblem C w = lambda B w.

    C = I + K (beta * sum of coefficient matrices + alpha * (I-A)(I-A)') K'
    and B = K K' plus a relative ridge (1e-6 of the mean diagonal mass) that
    keeps the pencil definite when K K' is singular. Returns the k
    eigenvectors of smallest eigenvalue as columns, orthonormalized so that
    W' (K K') W is exactly the identity, with each column's largest-magnitude
    entry made positive.
    """
    feats = np.asarray(getattr(K, "values", K), dtype=float)
    A = np.asarray(affinity, dtype=float)
    r, n = feats.shape
    if A.shape != (n, n):
        raise ValidationError("affinity shape does not match feature matrix")
    if not 1 <= k <= r:
        raise ValidationError(f"subspace dimension {k} not in [1, {r}]")

    eye_n = np.eye(n)
    residual = eye_n - A
    inner = beta * coeffs.total() + alpha * (residual @ residual.T)
    C = np.eye(r) + feats @ inner @ feats.T
    C = (C + C.T) / 2.0
    B = feats @ feats.T
    B = (B + B.T) / 2.0
    ridge = RIDGE_SCALE * np.trace(B) / r
    B += ridge * np.eye(r)

    try:
        eigvals, vecs = scipy.linalg.eigh(C, B, subset_by_index=[0, k - 1])
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"generalized eigensolve failed: {exc}") from exc
    if not np.isfinite(vecs).all():
        raise NumericalError("eigensolve produced non-finite eigenvectors")

    # eigh normalizes against the ridged pencil; restore W' (K K') W = I exactly
    gram = vecs.T @ (B - ridge * np.eye(r)) @ vecs
    gram = (gram + gram.T) / 2.0
    gvals, gvecs = np.linalg.eigh(gram)
    if gvals[0] <= 0:
        raise NumericalError("feature Gram is numerically indefinite on the subspace")
    vecs = vecs @ (gvecs * (1.0 / np.sqrt(gvals))) @ gvecs.T

    signs = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(k)])
    signs[signs == 0] = 1.0
    W = vecs * signs
    if return_eigenvalues:
        return W, eigvals
    return W


def _feature_operator(X: np.ndarray, spec: KernelSpec | None):
    if spec is None:
        return X, None
    resolved = resolve_bandwidth(spec, X)
    return kernel_matrix(X, resolved), resolved


def _normalize_columns(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return X / safe


def fit(source: Dataset, target: Dataset, cfg: TmdaConfig = TmdaConfig()) -> TmdaModel:
    """Fit projection weights on a labeled source and an unlabeled target.

    Builds the joint column matrix [source, target] and its feature operator,
    then alternates affinity solve, clustering, coefficient rebuild and
    projection solve until both squared-Frobenius changes fall below
    ``cfg.epsilon`` or ``cfg.max_outer`` passes complete. The projection
    starts at zero, so the first affinity solve is plain sparse
    self-representation. The per-pass trace records the embedded-feature
    discrepancy, both change residuals and the eigenvalues of the projection
    solve.
    """
    if source.dim != target.dim:
        raise ValidationError(
            f"source dimension {source.dim} != target dimension {target.dim}"
        )
    split = DomainSplit(source.n, target.n)
    X = np.hstack([source.X, target.X])
    if cfg.normalize_columns:
        X = _normalize_columns(X)

    n_manifolds = cfg.n_manifolds
    if n_manifolds is None:
        if source.labels is None:
            raise ValidationError("n_manifolds unset and source has no labels")
        n_manifolds = int(np.unique(source.labels).size)
    if n_manifolds > split.n:
        raise ValidationError("more manifolds than points")

    feats, spec = _feature_operator(X, cfg.kernel)
    k = cfg.subspace_dim
    if k is None:
        k = min(subspace_dim_from_mle(X, cfg.mle_neighbors), feats.shape[0])

    mu = cfg.admm.mu if cfg.admm.mu is not None else default_mu(X)
    admm_cfg = replace(
        cfg.admm, mu=mu, alpha=0.0 if cfg.mode == "decoupled" else cfg.alpha
    )

    W = np.zeros((feats.shape[0], k))
    A_prev = np.zeros((split.n, split.n))
    assignment = np.ones(split.n, dtype=int)
    affinity = A_prev
    trace: list[dict] = []
    converged = False
    max_outer = 1 if cfg.mode == "decoupled" else cfg.max_outer

    for _ in range(max_outer):
        affinity, _admm_state = admm_affinity(X, feats, W, admm_cfg)
        if cfg.mode == "global_mmd":
            assignment = np.ones(split.n, dtype=int)
            coeffs = build_coefficients(split, assignment, 1)
        else:
            assignment = ncut_cluster(affinity, n_manifolds, cfg.seed)
            coeffs = build_coefficients(split, assignment, n_manifolds)
        W_new, eigvals = solve_projection(
            feats, affinity, coeffs, cfg.alpha, cfg.beta, k, return_eigenvalues=True
        )
        embedded = W_new.T @ feats
        m3d_value = feature_m3d(embedded, coeffs)
        if not np.isfinite(m3d_value):
            err = DivergenceError("non-finite objective during alternation")
            err.trace = trace
            raise err
        d_aff = float(np.sum((affinity - A_prev) ** 2))
        d_w = float(np.sum((W_new - W) ** 2))
        trace.append(
            {
                "m3d": m3d_value,
                "affinity_change": d_aff,
                "weights_change": d_w,
                "eigenvalues": eigvals,
            }
        )
        W = W_new
        A_prev = affinity
        if d_aff <= cfg.epsilon and d_w <= cfg.epsilon:
            converged = True
            break

    return TmdaModel(
        weights=W,
        assignment=assignment,
        kernel=spec,
        train_columns=X,
        split=split,
        subspace_dim=k,
        normalize_columns=cfg.normalize_columns,
        mu=mu,
        affinity=affinity,
        converged=converged or cfg.mode == "decoupled",
        outer_iterations=len(trace),
        trace=trace,
    )


def transform(model: TmdaModel, X_new) -> Dataset:
    """Embed new points with a fitted model.

    Kernel models evaluate the kernel between the retained training columns
    and the new columns; the raw variant applies the projection directly.
    """
    cols = np.asarray(getattr(X_new, "X", X_new), dtype=float)
    if cols.ndim != 2 or cols.shape[0] != model.train_columns.shape[0]:
        raise ValidationError(
            f"expected {model.train_columns.shape[0]} rows, got {cols.shape}"
        )
    if model.normalize_columns:
        cols = _normalize_columns(cols)
    if model.kernel is None:
        return Dataset(model.weights.T @ cols)
    cross = kernel_cross(model.train_columns, cols, model.kernel)
    return Dataset(model.weights.T @ cross)


def save_model(path, model: TmdaModel) -> None:
    """Write a model container: [kernel], [W], [train], [assignment] sections."""
    with open(path, "w") as fh:
        fh.write("[kernel]\n")
        if model.kernel is None:
            fh.write("mapping raw\n")
        else:
            fh.write(f"mapping {model.kernel.kind}\n")
            if model.kernel.bandwidth is not None:
                fh.write(f"bandwidth {format_value(model.kernel.bandwidth)}\n")
        fh.write(f"n_source {model.split.n_source}\n")
        fh.write(f"normalize_columns {int(model.normalize_columns)}\n")
        fh.write("[W]\n")
        _write_matrix_block(fh, model.weights)
        fh.write("[train]\n")
        _write_matrix_block(fh, model.train_columns)
        fh.write("[assignment]\n")
        _write_matrix_block(fh, model.assignment[None, :].astype(float))


def load_model(path) -> TmdaModel:
    """Read a model container written by :func:`save_model`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "[kernel]":
        raise ParseError("model file must start with a [kernel] section", line=1)
    meta = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("["):
        parts = lines[pos].split()
        if len(parts) != 2:
            raise ParseError("kernel section lines must be 'key value'", line=pos + 1)
        meta[parts[0]] = parts[1]
        pos += 1
    blocks = {}
    for name in ("W", "train", "assignment"):
        if pos >= len(lines) or lines[pos].strip() != f"[{name}]":
            raise ParseError(f"expected [{name}] section", line=pos + 1)
        blocks[name], pos = _read_matrix_block(lines, pos + 1)

    mapping = meta.get("mapping")
    if mapping == "raw":
        spec = None
    elif mapping == "linear":
        spec = KernelSpec("linear")
    elif mapping == "rbf":
        if "bandwidth" not in meta:
            raise ParseError("rbf model is missing its bandwidth", line=2)
        spec = KernelSpec("rbf", float(meta["bandwidth"]))
    else:
        raise ParseError(f"unknown mapping {mapping!r}", line=2)

    n_source = int(meta.get("n_source", 0))
    train = blocks["train"]
    assignment = blocks["assignment"].ravel().astype(int)
    if assignment.shape[0] != train.shape[1]:
        raise ParseError("assignment length does not match training columns")
    return TmdaModel(
        weights=blocks["W"],
        assignment=assignment,
        kernel=spec,
        train_columns=train,
        split=DomainSplit(n_source, train.shape[1] - n_source),
        subspace_dim=blocks["W"].shape[1],
        normalize_columns=bool(int(meta.get("normalize_columns", "0"))),
    )
