"""Independent reference implementations used to check the library.

Everything here is deliberately written from first principles (loops, direct
formulas) so it shares no code path with the package.
"""
import numpy as np
from scipy.optimize import linear_sum_assignment


def mmd_by_double_sum(Xs, Xt, kfunc):
    """Three explicit double sums over a pointwise kernel function."""
    ns, nt = Xs.shape[1], Xt.shape[1]
    ss = sum(kfunc(Xs[:, i], Xs[:, j]) for i in range(ns) for j in range(ns))
    tt = sum(kfunc(Xt[:, i], Xt[:, j]) for i in range(nt) for j in range(nt))
    st = sum(kfunc(Xs[:, i], Xt[:, j]) for i in range(ns) for j in range(nt))
    return ss / ns**2 + tt / nt**2 - 2.0 * st / (ns * nt)


def mean_gap_sq(Xs, Xt):
    """Squared Euclidean distance between the two sample means."""
    gap = Xs.mean(axis=1) - Xt.mean(axis=1)
    return float(gap @ gap)


def lasso_cd(y, D, mu, skip, tol=1e-12, max_sweeps=20000):
    """Coordinate descent for min_a 0.5||y - D a||^2 + mu ||a||_1, a[skip] = 0."""
    n = D.shape[1]
    col_sq = np.sum(D * D, axis=0)
    a = np.zeros(n)
    r = y.copy()
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(n):
            if j == skip or col_sq[j] == 0.0:
                continue
            old = a[j]
            rho = D[:, j] @ r + col_sq[j] * old
            new = np.sign(rho) * max(abs(rho) - mu, 0.0) / col_sq[j]
            if new != old:
                r += D[:, j] * (old - new)
                a[j] = new
                biggest = max(biggest, abs(new - old))
        if biggest < tol:
            break
    return a


def lasso_self_representation(X, mu):
    """Column-by-column constrained lasso solution of the affinity problem."""
    n = X.shape[1]
    A = np.zeros((n, n))
    for i in range(n):
        A[:, i] = lasso_cd(X[:, i], X, mu, skip=i)
    return A


def hungarian_accuracy(true_labels, pred_labels):
    """Best-matching clustering accuracy via the assignment problem."""
    true_labels = np.asarray(true_labels)
    pred_labels = np.asarray(pred_labels)
    tl = np.unique(true_labels)
    pl = np.unique(pred_labels)
    counts = np.zeros((tl.size, pl.size))
    for i, t in enumerate(tl):
        for j, p in enumerate(pl):
            counts[i, j] = np.sum((true_labels == t) & (pred_labels == p))
    rows, cols = linear_sum_assignment(-counts)
    return counts[rows, cols].sum() / true_labels.size


def nn_bruteforce(train_X, train_y, test_X):
    """Exhaustive 1-NN with lowest-index tie breaking."""
    preds = []
    for j in range(test_X.shape[1]):
        best, best_d = 0, np.inf
        for i in range(train_X.shape[1]):
            d = float(np.sum((train_X[:, i] - test_X[:, j]) ** 2))
            if d < best_d:
                best, best_d = i, d
        preds.append(train_y[best])
    return np.asarray(preds)


def b_orthonormalize(G, B):
    """Make the columns of G satisfy W' B W = I via a symmetric inverse root."""
    M = G.T @ B @ G
    vals, vecs = np.linalg.eigh(M)
    inv_root = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    return G @ inv_root
