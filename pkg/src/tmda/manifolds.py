"""Shared-manifold discovery: sparse self-representation and spectral cuts.

The affinity solver expresses every point as a sparse combination of the other
points (zero diagonal), optionally coupling the reconstruction in an embedded
feature space through projection weights. Manifolds are then exposed by
normalized-cut spectral clustering of the symmetrized affinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._arrays import as_columns
from .errors import DivergenceError, ValidationError


@dataclass(frozen=True)
class AdmmConfig:
    """Settings for the affinity solver.

    mu      : sparsity weight; None picks the data-driven default.
    rho     : quadratic penalty of the split constraint.
    alpha   : weight of the embedded-space reconstruction coupling.
    epsilon : tolerance on both squared-Frobenius residuals.
    """

    mu: float | None = None
    rho: float = 1.0
    alpha: float = 0.0
    max_iter: int = 100
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.mu is not None and self.mu < 0:
            raise ValidationError("mu must be nonnegative")
        if self.rho <= 0:
            raise ValidationError("rho must be positive")
        if self.alpha < 0:
            raise ValidationError("alpha must be nonnegative")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")


@dataclass
class AdmmState:
    """Terminal state of one affinity solve."""

    A: np.ndarray
    Z: np.ndarray
    Delta: np.ndarray
    iterations: int
    primal_residual: float
    change_residual: float
    converged: bool
    primal_history: list = field(default_factory=list)
    change_history: list = field(default_factory=list)


def default_mu(X) -> float:
    """Data-driven sparsity weight: min over i of max over j != i of |x_i . x_j|.

    Dot products are evaluated pairwise so the value matches a brute-force
    enumeration bit for bit.
    """
    cols = as_columns(X)
    n = cols.shape[1]
    if n < 2:
        raise ValidationError("need at least 2 points for the sparsity weight")
    gram = np.zeros((n, n))
    for i in range(n):
        xi = cols[:, i]
        for j in range(i + 1, n):
            gram[i, j] = gram[j, i] = abs(np.dot(xi, cols[:, j]))
    np.fill_diagonal(gram, -np.inf)
    return float(gram.max(axis=1).min())


def soft_threshold(V, mu: float) -> np.ndarray:
    """Elementwise shrinkage (|v| - mu)_+ sgn(v)."""
    if mu < 0:
        raise ValidationError("threshold must be nonnegative")
    arr = np.asarray(V, dtype=float)
    if not np.isfinite(arr).all():
        raise ValidationError("soft_threshold input must be finite")
    return np.sign(arr) * np.maximum(np.abs(arr) - mu, 0.0)


def admm_affinity(X, K=None, W=None, cfg: AdmmConfig = AdmmConfig()):
    """Sparse self-representation affinity via alternating direction updates.

    Minimizes 0.5||X - XA||_F^2 + mu||A||_1 + 0.5*alpha||W'K - W'KA||_F^2
    subject to diag(A) = 0, where K is a feature matrix (kernel matrix or the
    raw data) and W projection weights. Iterates (Z, A, Delta) from a zero
    cold start; the left-hand system matrix is factorized once per call.

    Returns (A, AdmmState). K and W may be None when alpha is 0 or W is all
    zero, in which case the coupling term vanishes.

    Raises DivergenceError if an iterate becomes non-finite.
    """
    cols = as_columns(X)
    n = cols.shape[1]
    if n < 2:
        raise ValidationError("affinity needs at least 2 points")
    mu = cfg.mu if cfg.mu is not None else default_mu(cols)
    rho = cfg.rho

    gram = cols.T @ cols
    coupling = None
    if cfg.alpha > 0 and W is not None and np.any(W):
        if K is None:
            raise ValidationError("feature matrix required when coupling is active")
        feats = np.asarray(K, dtype=float)
        weights = np.asarray(W, dtype=float)
        if feats.shape[1] != n:
            raise ValidationError("feature matrix column count does not match data")
        if weights.shape[0] != feats.shape[0]:
            raise ValidationError("projection weights do not match feature matrix")
        proj = feats.T @ weights
        coupling = cfg.alpha * (proj @ proj.T)

    lhs = gram + rho * np.eye(n)
    rhs_const = gram.copy()
    if coupling is not None:
        lhs += coupling
        rhs_const += coupling
    try:
        factor = scipy.linalg.cho_factor(lhs, lower=True)
    except scipy.linalg.LinAlgError as exc:  # cannot happen for rho > 0
        raise AssertionError("self-representation system not SPD") from exc

    A = np.zeros((n, n))
    Z = np.zeros((n, n))
    Delta = np.zeros((n, n))
    primal_hist: list[float] = []
    change_hist: list[float] = []
    converged = False
    iterations = 0
    for _ in range(cfg.max_iter):
        iterations += 1
        Z = scipy.linalg.cho_solve(factor, rhs_const + rho * A + Delta)
        if not np.isfinite(Z).all():
            raise DivergenceError(f"non-finite iterate at inner iteration {iterations}")
        J = soft_threshold(Z - Delta / rho, mu)
        np.fill_diagonal(J, 0.0)
        A_new = J
        # dual ascent for the multiplier convention used by the Z and A steps
        Delta = Delta + rho * (A_new - Z)
        if not np.isfinite(Delta).all():
            raise DivergenceError(f"non-finite iterate at inner iteration {iterations}")
        primal = float(np.sum((Z - A_new) ** 2))
        change = float(np.sum((A_new - A) ** 2))
        primal_hist.append(primal)
        change_hist.append(change)
        A = A_new
        if primal <= cfg.epsilon and change <= cfg.epsilon:
            converged = True
            break

    state = AdmmState(
        A=A,
        Z=Z,
        Delta=Delta,
        iterations=iterations,
        primal_residual=primal_hist[-1],
        change_residual=change_hist[-1],
        converged=converged,
        primal_history=primal_hist,
        change_history=change_hist,
    )
    return A, state


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    n, k = points.shape[0], centers.shape[0]
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_labels = np.argmin(d2, axis=1)
        for c in range(k):
            members = new_labels == c
            if members.any():
                centers[c] = points[members].mean(axis=0)
            else:
                # revive an empty cluster at the point farthest from its center
                worst = int(np.argmax(np.min(d2, axis=1)))
                centers[c] = points[worst]
                new_labels[worst] = c
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    inertia = float(np.sum(d2[np.arange(n), labels]))
    return labels, inertia


def _kmeans(points: np.ndarray, k: int, seed: int, restarts: int = 10) -> np.ndarray:
    rng = np.random.default_rng(seed)
    best_labels = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(points, k, rng)
        labels, inertia = _lloyd(points, centers.copy())
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _spectral_kmeans(S: np.ndarray, n_clusters: int, seed: int) -> np.ndarray:
    """Normalized-Laplacian embedding plus seeded k-means on an affinity S."""
    n = S.shape[0]
    deg = S.sum(axis=1)
    dead = deg <= 0
    if dead.any():
        idx = np.flatnonzero(dead)
        S = S.copy()
        S[idx, idx] += 1e-12
        deg = S.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(n) - (inv_sqrt[:, None] * S) * inv_sqrt[None, :]
    lap = (lap + lap.T) / 2.0
    _, vecs = scipy.linalg.eigh(lap, subset_by_index=[0, n_clusters - 1])
    norms = np.linalg.norm(vecs, axis=1)
    norms[norms == 0] = 1.0
    embedding = vecs / norms[:, None]
    return _kmeans(embedding, n_clusters, seed)


def ncut_cluster(A, n_clusters: int, seed: int) -> np.ndarray:
    """Normalized-cut clustering of an affinity matrix.

    Symmetrizes S = |A| + |A|', embeds points with the eigenvectors of the
    n_clusters smallest eigenvalues of the symmetric normalized Laplacian
    (zero-degree rows get a 1e-12 self loop), row-normalizes, and runs seeded
    k-means (k-means++ initialization, 10 restarts, best inertia wins).

    Vertices whose degree is negligible next to the median (heavily shrunk
    points with no usable edges) are held out of the spectral step; each
    extra graph component would otherwise contribute another zero eigenvalue
    and scramble the n_clusters-dimensional embedding. Held-out vertices
    join the largest cluster afterwards. Returns labels in 1..n_clusters.
    """
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("affinity matrix must be square")
    n = arr.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValidationError(f"cluster count {n_clusters} not in [1, {n}]")
    if n_clusters == 1:
        return np.ones(n, dtype=int)

    S = np.abs(arr) + np.abs(arr).T
    deg = S.sum(axis=1)
    positive = deg[deg > 0]
    threshold = 1e-8 * np.median(positive) if positive.size else 0.0
    live = deg > threshold
    labels = np.empty(n, dtype=int)
    if live.sum() >= n_clusters and not live.all():
        sub = _spectral_kmeans(S[np.ix_(live, live)], n_clusters, seed)
        labels[live] = sub
        counts = np.bincount(sub, minlength=n_clusters)
        labels[~live] = int(np.argmax(counts))
    else:
        labels[:] = _spectral_kmeans(S, n_clusters, seed)
    return labels + 1
