import math

import numpy as np
import pytest

from tmda import (
    DegenerateDataError,
    KernelSpec,
    ValidationError,
    kernel_cross,
    kernel_matrix,
    median_bandwidth,
    resolve_bandwidth,
)


def test_linear_identity_columns():
    K = kernel_matrix(np.eye(2), KernelSpec("linear"))
    assert np.array_equal(K, np.eye(2))


def test_rbf_diagonal_is_exactly_one():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((4, 12))
    K = kernel_matrix(X, KernelSpec("rbf", 0.7))
    assert np.all(np.diag(K) == 1.0)
    assert np.all(K > 0) and np.all(K <= 1)


def test_rbf_two_scalar_points():
    # direct evaluation of exp(-gamma ||x - y||^2) for x=0, y=1, gamma=1
    X = np.array([[0.0, 1.0]])
    K = kernel_matrix(X, KernelSpec("rbf", 1.0))
    assert K[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert K[1, 0] == K[0, 1]


def test_kernel_matrix_is_exactly_symmetric():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((6, 30))
    for spec in (KernelSpec("linear"), KernelSpec("rbf", 2.0)):
        K = kernel_matrix(X, spec)
        assert np.array_equal(K, K.T)


def test_kernel_matrix_rejects_non_finite():
    X = np.array([[1.0, np.nan]])
    with pytest.raises(ValidationError):
        kernel_matrix(X, KernelSpec("linear"))


def test_rbf_requires_bandwidth():
    with pytest.raises(ValidationError):
        kernel_matrix(np.eye(2), KernelSpec("rbf"))


def test_kernel_spec_validation():
    with pytest.raises(ValidationError):
        KernelSpec("poly")
    with pytest.raises(ValidationError):
        KernelSpec("rbf", -1.0)
    with pytest.raises(ValidationError):
        KernelSpec("linear", 1.0)


def test_median_bandwidth_single_pair():
    X = np.array([[0.0, 2.0]])
    assert median_bandwidth(X) == pytest.approx(0.25)


def test_median_bandwidth_three_points():
    # pairwise squared distances {1, 1, 4}, median 1
    X = np.array([[0.0, 1.0, 2.0]])
    assert median_bandwidth(X) == pytest.approx(1.0)


def test_median_bandwidth_brute_force():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((3, 9))
    sq = [
        float(np.sum((X[:, i] - X[:, j]) ** 2))
        for i in range(9)
        for j in range(i + 1, 9)
    ]
    assert median_bandwidth(X) == pytest.approx(1.0 / np.median(sq), rel=1e-12)


def test_median_bandwidth_duplicate_columns_error():
    X = np.ones((3, 4))
    with pytest.raises(DegenerateDataError):
        median_bandwidth(X)


def test_resolve_bandwidth_fills_rbf_only():
    X = np.array([[0.0, 2.0]])
    spec = resolve_bandwidth(KernelSpec("rbf"), X)
    assert spec.bandwidth == pytest.approx(0.25)
    assert resolve_bandwidth(KernelSpec("linear"), X) == KernelSpec("linear")


def test_rbf_gram_positive_semidefinite():
    rng = np.random.default_rng(21)
    for n in (5, 20, 50):
        X = rng.standard_normal((4, n))
        K = kernel_matrix(X, KernelSpec("rbf", 1.3))
        smallest = np.linalg.eigvalsh(K)[0]
        assert smallest >= -1e-8


def test_kernel_matrix_permutation_equivariant():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((5, 14))
    perm = rng.permutation(14)
    for spec in (KernelSpec("linear"), KernelSpec("rbf", 0.9)):
        K = kernel_matrix(X, spec)
        Kp = kernel_matrix(X[:, perm], spec)
        assert np.allclose(Kp, K[np.ix_(perm, perm)], atol=1e-14)


def test_kernel_cross_matches_self_matrix():
    rng = np.random.default_rng(13)
    X = rng.standard_normal((4, 10))
    for spec in (KernelSpec("linear"), KernelSpec("rbf", 0.4)):
        K = kernel_matrix(X, spec)
        C = kernel_cross(X, X, spec)
        assert np.allclose(C, K, atol=1e-12)


def test_kernel_cross_dimension_mismatch():
    with pytest.raises(ValidationError):
        kernel_cross(np.eye(3), np.eye(4), KernelSpec("linear"))
