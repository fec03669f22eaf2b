import numpy as np
import pandas as pd
import pytest

from src.evaluation.engine import (
    ExperimentEngine,
    classify_forest,
    classify_knn,
    classify_svm,
    confusion_metrics,
    format_report_table,
    metrics_from_counts,
    rule_of_30,
    split_rows,
)
from src.schemas.models import ClassifierKind, ExperimentConfig, Scenario
from src.selection.stats_select import FeatureMatrix
from src.utils.exceptions import ExperimentError, ParameterError


def _blobs(rng, per_class=40, features=20, shift=6.0):
    X = rng.standard_normal((2 * per_class, features))
    X[per_class:, :3] += shift
    y = np.r_[np.zeros(per_class, dtype=int), np.ones(per_class, dtype=int)]
    return X, y


def _feature_matrix(X, y, speakers=None):
    n = len(y)
    meta = pd.DataFrame({
        "path": [f"r{i}.wav" for i in range(n)],
        "label": np.where(y == 1, "pathological", "healthy"),
        "speaker": speakers if speakers is not None else [f"s{i}" for i in range(n)],
        "gender": ["M" if i % 2 else "F" for i in range(n)],
    })
    features = pd.DataFrame(X, columns=[f"f{j}" for j in range(X.shape[1])])
    return FeatureMatrix(features=features, meta=meta)


@pytest.mark.parametrize("n, expected", [(226, 13.27), (436, 6.88), (109, 27.52)])
def test_rule_of_30(n, expected):
    assert round(rule_of_30(n), 2) == expected


def test_rule_of_30_rejects_empty_sets():
    with pytest.raises(ParameterError):
        rule_of_30(0)


def test_metrics_example():
    m = metrics_from_counts(tp=3, tn=5, fp=1, fn=1)
    assert m.acc == pytest.approx(80.0)
    assert m.sen == pytest.approx(75.0)
    assert m.spe == pytest.approx(83.33, abs=0.01)
    assert metrics_from_counts(4, 6, 0, 0) == (100.0, 100.0, 100.0)


def test_confusion_metrics_match_counts(rng):
    for _ in range(1000):
        y_true = rng.integers(0, 2, 30)
        y_true[:2] = [0, 1]
        y_pred = rng.integers(0, 2, 30)
        tp = int(np.sum((y_true == 1) & (y_pred == 1)))
        tn = int(np.sum((y_true == 0) & (y_pred == 0)))
        fp = int(np.sum((y_true == 0) & (y_pred == 1)))
        fn = int(np.sum((y_true == 1) & (y_pred == 0)))
        m = confusion_metrics(y_true, y_pred)
        assert m.acc == pytest.approx(100 * (tp + tn) / 30)
        assert m.sen == pytest.approx(100 * tp / (tp + fn))
        assert m.spe == pytest.approx(100 * tn / (tn + fp))


def test_nearest_neighbour_reproduces_training_labels(rng):
    X, y = _blobs(rng)
    np.testing.assert_array_equal(classify_knn(X, y, X, k=1), y)


def test_equidistant_neighbours_resolve_to_the_earlier_row():
    query = np.array([[0.0]])
    assert classify_knn(np.array([[-1.0], [1.0]]), np.array([1, 0]), query, k=1)[0] == 1
    assert classify_knn(np.array([[1.0], [-1.0]]), np.array([0, 1]), query, k=1)[0] == 0
    # four equidistant rows, first three taken: two healthy votes win
    X = np.array([[2.0], [-2.0], [2.0], [-2.0]])
    assert classify_knn(X, np.array([0, 1, 0, 1]), query, k=3)[0] == 0
    assert classify_knn(X, np.array([1, 0, 1, 0]), query, k=3)[0] == 1


def test_tied_vote_goes_to_the_smaller_label():
    X = np.array([[1.0], [-1.0]])
    assert classify_knn(X, np.array([1, 0]), np.array([[0.0]]), k=2)[0] == 0


def test_classifiers_separate_blobs(rng):
    X, y = _blobs(rng)
    X_test, y_test = _blobs(rng, per_class=10)
    np.testing.assert_array_equal(classify_knn(X, y, X_test), y_test)
    predictions, oob = classify_forest(X, y, X_test, seed=1)
    np.testing.assert_array_equal(predictions, y_test)
    assert 0 <= oob <= 100
    np.testing.assert_array_equal(classify_svm(X, y, X_test, seed=1), y_test)


def test_forest_of_stumps_learns_a_threshold():
    X = np.arange(10, dtype=float)[:, None]
    y = (X[:, 0] >= 5).astype(int)
    predictions, _ = classify_forest(X, y, X, trees=101, max_depth=1, seed=3)
    np.testing.assert_array_equal(predictions, y)


def test_empty_test_set(rng):
    X, y = _blobs(rng, per_class=5)
    assert classify_knn(X, y, X[:0]).size == 0
    assert classify_forest(X, y, X[:0])[0].size == 0


def test_split_keeps_both_classes_each_side():
    y = np.r_[np.zeros(10, dtype=int), np.ones(10, dtype=int)]
    speakers = np.array([f"s{i}" for i in range(20)])
    for seed in range(20):
        split = split_rows(y, speakers, 0.25, seed)
        assert set(y[split.train]) == {0, 1}
        assert set(y[split.test]) == {0, 1}
        assert not set(split.train) & set(split.test)


def test_split_is_speaker_disjoint():
    y = np.r_[np.zeros(20, dtype=int), np.ones(20, dtype=int)]
    speakers = np.array([f"s{i // 2}" for i in range(40)])
    split = split_rows(y, speakers, 0.25, 7)
    assert not set(speakers[split.train]) & set(speakers[split.test])


def test_grouped_split_is_stratified_on_skewed_classes():
    # 30 healthy and 8 pathological speakers, two recordings each
    y = np.r_[np.zeros(60, dtype=int), np.ones(16, dtype=int)]
    speakers = np.array([f"s{i // 2}" for i in range(76)])
    for seed in range(20):
        split = split_rows(y, speakers, 0.25, seed)
        assert set(y[split.train]) == {0, 1}
        assert set(y[split.test]) == {0, 1}
        assert not set(speakers[split.train]) & set(speakers[split.test])
        assert abs(y[split.test].mean() - y.mean()) <= 0.1
        assert 0.15 <= len(split.test) / len(y) <= 0.35


def test_split_gives_up_when_impossible():
    y = np.array([0, 0, 0, 1])
    speakers = np.array(["a", "a", "a", "b"])
    with pytest.raises(ExperimentError):
        split_rows(y, speakers, 0.25, 0, max_redraws=3)


def test_separable_experiment(rng):
    X, y = _blobs(rng)
    config = ExperimentConfig(classifier=ClassifierKind.KNN, repetitions=10, seed=5)
    report = ExperimentEngine(workers=2).run_experiment(_feature_matrix(X, y), config)
    assert report.acc.mean == 100.0
    assert report.acc.std == 0.0
    assert len(report.repetitions) == 10
    assert report.rule_of_30_threshold == pytest.approx(3000 / 80)
    assert not report.reliable
    assert "±" in format_report_table(report)


def test_experiment_is_deterministic(rng):
    X, y = _blobs(rng, shift=1.0)
    fm = _feature_matrix(X, y)
    config = ExperimentConfig(classifier=ClassifierKind.FOREST, repetitions=4, seed=11, forest_trees=20)
    first = ExperimentEngine(workers=1).run_experiment(fm, config)
    second = ExperimentEngine(workers=3).run_experiment(fm, config)
    assert first.model_dump() == second.model_dump()


def test_shuffled_labels_give_chance_accuracy(rng):
    X, y = _blobs(rng)
    fm = _feature_matrix(X, rng.permutation(y))
    config = ExperimentConfig(classifier=ClassifierKind.KNN, repetitions=100, seed=0)
    report = ExperimentEngine(workers=4).run_experiment(fm, config)
    assert abs(report.acc.mean - 50.0) <= 10.0


def test_scenario_filter_and_minimum_rows(rng):
    X, y = _blobs(rng, per_class=6)
    fm = _feature_matrix(X, y)
    config = ExperimentConfig(classifier=ClassifierKind.KNN, repetitions=2, scenario=Scenario.FEMALE)
    with pytest.raises(ExperimentError):
        ExperimentEngine(workers=1).run_experiment(fm, config)
