import numpy as np
import pytest

from tmda import (
    AdmmConfig,
    Dataset,
    SynthConfig,
    TmdaConfig,
    ValidationError,
    accuracy,
    eval_report,
    generate_synthetic,
    nn_classify,
    rmse,
    select_linear_strategy,
)
from tmda.evaluation import LINEAR_KERNEL, RAW_LINEAR, _stratified_folds

from oracles import nn_bruteforce


def test_nn_exact_match_wins():
    train = Dataset(np.array([[0.0, 3.0], [0.0, 4.0]]), labels=[1, 2])
    pred = nn_classify(train, np.array([[3.0], [4.0]]))
    assert pred.tolist() == [2]


def test_nn_tie_breaks_to_lowest_index():
    # test point exactly between two training points with different labels
    train = Dataset(np.array([[0.0, 2.0]]), labels=[5, 7])
    pred = nn_classify(train, np.array([[1.0]]))
    assert pred.tolist() == [5]


def test_nn_matches_bruteforce_oracle():
    rng = np.random.default_rng(0)
    train = Dataset(rng.standard_normal((4, 20)), labels=rng.integers(1, 4, 20))
    test = rng.standard_normal((4, 15))
    assert np.array_equal(
        nn_classify(train, test), nn_bruteforce(train.X, train.labels, test)
    )


def test_nn_requires_labels_and_matching_dims():
    with pytest.raises(ValidationError):
        nn_classify(Dataset(np.eye(2)), np.eye(2))
    with pytest.raises(ValidationError):
        nn_classify(Dataset(np.eye(2), [1, 2]), np.eye(3))


def test_nn_isometry_invariant():
    rng = np.random.default_rng(1)
    train = Dataset(rng.standard_normal((5, 25)), labels=rng.integers(1, 4, 25))
    test = rng.standard_normal((5, 12))
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    rotated_train = Dataset(Q @ train.X, train.labels)
    assert np.array_equal(
        nn_classify(train, test), nn_classify(rotated_train, Q @ test)
    )


def test_rmse_cases():
    assert rmse([1, 2, 3], [1, 2, 3]) == 0.0
    assert rmse([1, 1], [1, 3]) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(ValidationError):
        rmse([1], [1, 2])


def test_rmse_matches_direct_summation():
    rng = np.random.default_rng(2)
    pred = rng.integers(1, 6, 40)
    truth = rng.integers(1, 6, 40)
    direct = np.sqrt(sum((int(p) - int(t)) ** 2 for p, t in zip(pred, truth)) / 40)
    assert rmse(pred, truth) == pytest.approx(direct, abs=1e-12)


def test_rmse_permutation_invariant():
    rng = np.random.default_rng(3)
    pred = rng.integers(1, 6, 30)
    truth = rng.integers(1, 6, 30)
    perm = rng.permutation(30)
    assert rmse(pred[perm], truth[perm]) == pytest.approx(rmse(pred, truth), abs=1e-14)


def test_accuracy_complements_error():
    rng = np.random.default_rng(4)
    pred = rng.integers(1, 4, 50)
    truth = rng.integers(1, 4, 50)
    acc = accuracy(pred, truth)
    err = np.mean(pred != truth)
    assert acc + err == 1.0


def test_eval_report_per_class():
    pred = [1, 1, 2, 2, 2]
    truth = [1, 2, 2, 2, 1]
    report = eval_report(pred, truth)
    assert report.n_evaluated == 5
    assert report.accuracy == pytest.approx(3 / 5)
    assert report.per_class_accuracy[1] == pytest.approx(1 / 2)
    assert report.per_class_accuracy[2] == pytest.approx(2 / 3)


def test_stratified_folds_cover_everything():
    labels = np.repeat([1, 2, 3], 10)
    folds = _stratified_folds(labels, 5, np.random.default_rng(0))
    combined = np.sort(np.concatenate(folds))
    assert np.array_equal(combined, np.arange(30))
    for fold in folds:
        values, counts = np.unique(labels[fold], return_counts=True)
        assert values.tolist() == [1, 2, 3]
        assert counts.tolist() == [2, 2, 2]


def test_stratified_folds_fall_back_with_warning():
    labels = np.array([1, 1, 1, 1, 1, 2, 2, 2])  # class 2 has < 5 members
    with pytest.warns(UserWarning):
        folds = _stratified_folds(labels, 5, np.random.default_rng(0))
    assert np.array_equal(np.sort(np.concatenate(folds)), np.arange(8))


def _strategy_task():
    cfg = SynthConfig(
        n_manifolds=2,
        ambient_dim=16,
        manifold_dim=3,
        points_per_manifold=15,
        seed=21,
    )
    return generate_synthetic(cfg)


def _strategy_cfg():
    return TmdaConfig(
        subspace_dim=4, n_manifolds=2, max_outer=2, seed=5, admm=AdmmConfig(max_iter=60)
    )


def test_select_linear_strategy_reports_folds():
    task = _strategy_task()
    selection = select_linear_strategy(task.source, task.target, _strategy_cfg())
    assert selection.strategy in (RAW_LINEAR, LINEAR_KERNEL)
    assert set(selection.fold_errors) == {RAW_LINEAR, LINEAR_KERNEL}
    for errors in selection.fold_errors.values():
        assert len(errors) == 5
        assert all(0.0 <= e <= 1.0 for e in errors)


def test_select_linear_strategy_deterministic():
    task = _strategy_task()
    first = select_linear_strategy(task.source, task.target, _strategy_cfg())
    second = select_linear_strategy(task.source, task.target, _strategy_cfg())
    assert first.strategy == second.strategy
    assert first.fold_errors == second.fold_errors


def test_select_linear_strategy_tie_goes_to_raw(monkeypatch):
    import tmda.evaluation as evaluation

    task = _strategy_task()
    # force identical predictions for both mappings: the tie must pick raw
    monkeypatch.setattr(
        evaluation, "nn_classify", lambda train, test: np.ones(np.asarray(getattr(test, "X", test)).shape[1], dtype=int)
    )
    selection = select_linear_strategy(task.source, task.target, _strategy_cfg())
    assert selection.fold_errors[RAW_LINEAR] == selection.fold_errors[LINEAR_KERNEL]
    assert selection.strategy == RAW_LINEAR


def test_select_linear_strategy_needs_labels():
    task = _strategy_task()
    unlabeled = Dataset(task.source.X)
    with pytest.raises(ValidationError):
        select_linear_strategy(unlabeled, task.target, _strategy_cfg())
