"""Nearest-neighbor evaluation and the source-error mapping selector."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ._arrays import pairwise_sqdist
from .data import Dataset
from .errors import ValidationError
from .kernels import KernelSpec
from .solver import TmdaConfig, fit, transform

RAW_LINEAR = "raw"
LINEAR_KERNEL = "linear"


@dataclass
class EvalReport:
    rmse: float
    accuracy: float
    per_class_accuracy: dict
    n_evaluated: int


@dataclass
class StrategySelection:
    """Chosen linear mapping plus the per-fold error vectors behind it."""

    strategy: str
    fold_errors: dict


def nn_classify(train: Dataset, test) -> np.ndarray:
    """1-nearest-neighbor labels under Euclidean distance.

    Ties are broken by the lowest training-column index.
    """
    if train.labels is None:
        raise ValidationError("training dataset must be labeled")
    if train.n == 0:
        raise ValidationError("training dataset is empty")
    test_cols = np.asarray(getattr(test, "X", test), dtype=float)
    if test_cols.shape[0] != train.dim:
        raise ValidationError(
            f"feature dimensions differ: {test_cols.shape[0]} vs {train.dim}"
        )
    d2 = pairwise_sqdist(train.X, test_cols)
    nearest = np.argmin(d2, axis=0)
    return train.labels[nearest]


def rmse(pred, truth) -> float:
    """Root mean squared difference of two equal-length label vectors."""
    p = np.asarray(pred, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise ValidationError("prediction and truth must have equal nonzero length")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def accuracy(pred, truth) -> float:
    p = np.asarray(pred).ravel()
    t = np.asarray(truth).ravel()
    if p.shape != t.shape or p.size == 0:
        raise ValidationError("prediction and truth must have equal nonzero length")
    return float(np.mean(p == t))


def eval_report(pred, truth) -> EvalReport:
    p = np.asarray(pred, dtype=int).ravel()
    t = np.asarray(truth, dtype=int).ravel()
    per_class = {}
    for label in np.unique(t):
        members = t == label
        per_class[int(label)] = float(np.mean(p[members] == label))
    return EvalReport(
        rmse=rmse(p, t),
        accuracy=accuracy(p, t),
        per_class_accuracy=per_class,
        n_evaluated=int(t.size),
    )


def _stratified_folds(labels: np.ndarray, n_folds: int, rng: np.random.Generator):
    _, counts = np.unique(labels, return_counts=True)
    folds = [[] for _ in range(n_folds)]
    if counts.min() < n_folds:
        warnings.warn(
            "a class has fewer members than folds; falling back to unstratified folds"
        )
        order = rng.permutation(labels.size)
        for pos, idx in enumerate(order):
            folds[pos % n_folds].append(idx)
    else:
        for label in np.unique(labels):
            order = rng.permutation(np.flatnonzero(labels == label))
            for pos, idx in enumerate(order):
                folds[pos % n_folds].append(idx)
    return [np.sort(np.asarray(f, dtype=int)) for f in folds]


def select_linear_strategy(
    source: Dataset, target: Dataset, cfg: TmdaConfig, n_folds: int = 5
) -> StrategySelection:
    """Pick the raw or linear-kernel mapping by 5-fold source error.

    Splits the labeled source into seeded stratified folds; for each mapping,
    fits on the remaining folds (target unchanged), classifies the held-out
    fold in the embedded space, and averages the misclassification rate. The
    lower mean error wins; exact ties go to the raw mapping.
    """
    if source.labels is None:
        raise ValidationError("strategy selection needs source labels")
    if source.n < n_folds:
        raise ValidationError(f"need at least {n_folds} source points")
    rng = np.random.default_rng(cfg.seed)
    folds = _stratified_folds(source.labels, n_folds, rng)

    candidates = {
        RAW_LINEAR: replace(cfg, kernel=None),
        LINEAR_KERNEL: replace(cfg, kernel=KernelSpec("linear")),
    }
    fold_errors: dict[str, list[float]] = {}
    for name, strategy_cfg in candidates.items():
        errors = []
        for fold in folds:
            held = fold
            kept = np.setdiff1d(np.arange(source.n), held)
            train = Dataset(source.X[:, kept], source.labels[kept])
            model = fit(train, target, strategy_cfg)
            emb_train = transform(model, train.X)
            emb_held = transform(model, source.X[:, held])
            pred = nn_classify(Dataset(emb_train.X, train.labels), emb_held)
            errors.append(1.0 - accuracy(pred, source.labels[held]))
        fold_errors[name] = errors

    mean_raw = float(np.mean(fold_errors[RAW_LINEAR]))
    mean_lin = float(np.mean(fold_errors[LINEAR_KERNEL]))
    strategy = RAW_LINEAR if mean_raw <= mean_lin else LINEAR_KERNEL
    return StrategySelection(strategy=strategy, fold_errors=fold_errors)
