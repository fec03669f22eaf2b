"""
Classification engine: repeated stratified splits, train-only normalization
and selection, built-in classifiers, ACC/SEN/SPE metrics and the Rule of 30
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import confusion_matrix
from sklearn.metrics.pairwise import euclidean_distances
from sklearn.model_selection import GridSearchCV, StratifiedGroupKFold, StratifiedKFold, train_test_split
from sklearn.svm import SVC

from src.config.settings import settings
from src.extraction.pipeline import filter_scenario
from src.schemas.models import (
    ClassifierKind,
    ExperimentConfig,
    ExperimentReport,
    RepetitionResult,
)
from src.selection.stats_select import FeatureMatrix, select_features, zscore_apply, zscore_fit
from src.utils.exceptions import ExperimentError, ParameterError
from src.utils.helpers import format_mean_std, summarize
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

MIN_ROWS_PER_CLASS = 4
SVM_GRID: Dict[str, List] = {
    "C": [0.1, 1.0, 10.0, 100.0],
    "gamma": ["scale", 1e-3, 1e-2, 1e-1],
}


class Metrics(NamedTuple):
    acc: float
    sen: float
    spe: float


class Split(NamedTuple):
    train: np.ndarray
    test: np.ndarray
    redraws: int


def metrics_from_counts(tp: int, tn: int, fp: int, fn: int) -> Metrics:
    """ACC, SEN and SPE in percent with pathological as the positive class"""
    def pct(numerator: int, denominator: int) -> float:
        return 100.0 * numerator / denominator if denominator else float("nan")

    return Metrics(
        acc=pct(tp + tn, tp + tn + fp + fn),
        sen=pct(tp, tp + fn),
        spe=pct(tn, tn + fp),
    )


def confusion_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> Metrics:
    tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
    return metrics_from_counts(int(tp), int(tn), int(fp), int(fn))


def rule_of_30(n_trials: int) -> float:
    """Smallest observed error rate in percent that 30 errors make reliable"""
    if n_trials <= 0:
        raise ParameterError("rule_of_30 needs a positive number of trials")
    return 100.0 * 30.0 / n_trials


def classify_knn(X_train: np.ndarray, y_train: np.ndarray, X_test: np.ndarray, k: int = 5) -> np.ndarray:
    """Majority vote of the k nearest training rows.

    Equidistant neighbours are taken in training-row order; a tied vote goes
    to the smaller label.
    """
    if len(X_test) == 0:
        return np.empty(0, dtype=int)
    y_train = np.asarray(y_train, dtype=int)
    k = min(k, len(X_train))
    distances = euclidean_distances(X_test, X_train)
    nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
    votes = y_train[nearest]
    return np.array([np.bincount(row, minlength=2).argmax() for row in votes])


def classify_forest(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_test: np.ndarray,
    trees: int = 100,
    max_depth: int = 16,
    seed: int = 0,
) -> Tuple[np.ndarray, Optional[float]]:
    """Predictions and out-of-bag accuracy in percent"""
    model = RandomForestClassifier(
        n_estimators=trees,
        criterion="gini",
        max_features="sqrt",
        max_depth=max_depth,
        bootstrap=True,
        oob_score=True,
        random_state=seed,
        n_jobs=1,
    )
    model.fit(X_train, y_train)
    oob = 100.0 * float(model.oob_score_) if hasattr(model, "oob_score_") else None
    if len(X_test) == 0:
        return np.empty(0, dtype=int), oob
    return model.predict(X_test), oob


def classify_svm(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_test: np.ndarray,
    seed: int = 0,
    grid: Optional[Dict[str, List]] = None,
) -> np.ndarray:
    """RBF SVM with C and gamma tuned by stratified CV on the training rows"""
    if len(X_test) == 0:
        return np.empty(0, dtype=int)
    folds = int(min(5, np.bincount(y_train).min()))
    if folds < 2:
        model = SVC(kernel="rbf").fit(X_train, y_train)
        return model.predict(X_test)
    search = GridSearchCV(
        SVC(kernel="rbf"),
        param_grid=grid or SVM_GRID,
        cv=StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed),
        scoring="accuracy",
        n_jobs=1,
    )
    search.fit(X_train, y_train)
    logger.debug("SVM grid search picked %s", search.best_params_)
    return search.predict(X_test)


def _redraw_seed(seed: int, redraw: int) -> int:
    if redraw == 0:
        return seed
    return int(np.random.default_rng([seed, redraw]).integers(2 ** 31 - 1))


def split_rows(
    y: np.ndarray,
    speakers: np.ndarray,
    test_size: float,
    seed: int,
    max_redraws: int = 10,
) -> Split:
    """Stratified split; speaker-disjoint when any speaker has several recordings.

    Grouped splits hold out one fold of a shuffled stratified group k-fold
    with k = round(1 / test_size).
    """
    rows = np.arange(len(y))
    grouped = len(np.unique(speakers)) < len(speakers)
    folds = max(2, int(round(1.0 / test_size)))

    for redraw in range(max_redraws + 1):
        state = _redraw_seed(seed, redraw)
        try:
            if grouped:
                splitter = StratifiedGroupKFold(n_splits=folds, shuffle=True, random_state=state)
                train, test = next(splitter.split(rows, y, groups=speakers))
            else:
                train, test = train_test_split(rows, test_size=test_size, stratify=y, random_state=state)
        except ValueError as e:
            logger.debug("Split attempt %d failed: %s", redraw, e)
            continue
        if len(np.unique(y[train])) == 2 and len(np.unique(y[test])) == 2:
            if redraw:
                logger.warning("Split with seed %d needed %d redraw(s)", seed, redraw)
            return Split(train=np.sort(train), test=np.sort(test), redraws=redraw)

    raise ExperimentError(f"No split with both classes on each side after {max_redraws} redraws (seed {seed})")


class ExperimentEngine:
    """Runs the repeated-split classification protocol on a feature matrix"""

    def __init__(self, workers: Optional[int] = None) -> None:
        self.workers = workers or settings.THREADS

    def run_repetition(self, fm: FeatureMatrix, config: ExperimentConfig, index: int) -> RepetitionResult:
        seed = config.seed + index
        y = fm.labels
        speakers = fm.meta["speaker"].to_numpy() if "speaker" in fm.meta else np.arange(len(fm)).astype(str)
        split = split_rows(y, speakers, config.test_size, seed, config.max_redraws)

        train = fm.subset(split.train)
        test = fm.subset(split.test)
        scaler = zscore_fit(train)
        train_z = zscore_apply(scaler, train)
        test_z = zscore_apply(scaler, test)

        selection = select_features(train_z, config.alpha, config.missing_threshold)
        columns = selection.selected
        fallback = False
        if not columns:
            columns = [c for c in train_z.columns if train_z.features[c].notna().all()]
            fallback = True
            logger.warning("Repetition %d: no feature passed alpha=%s, using all %d finite columns",
                           index, config.alpha, len(columns))
        if not columns:
            raise ExperimentError(f"Repetition {index}: no usable feature columns")

        # missing values sit at the training mean, which is 0 after z-scoring
        X_train = train_z.features.loc[:, columns].fillna(0.0).to_numpy()
        X_test = test_z.features.loc[:, columns].fillna(0.0).to_numpy()
        y_train, y_test = train.labels, test.labels

        oob = None
        if config.classifier is ClassifierKind.KNN:
            predictions = classify_knn(X_train, y_train, X_test, config.knn_k)
        elif config.classifier is ClassifierKind.FOREST:
            predictions, oob = classify_forest(
                X_train, y_train, X_test, config.forest_trees, config.forest_max_depth, seed,
            )
        else:
            predictions = classify_svm(X_train, y_train, X_test, seed)

        metrics = confusion_metrics(y_test, predictions)
        return RepetitionResult(
            index=index,
            seed=seed,
            acc=metrics.acc,
            sen=metrics.sen,
            spe=metrics.spe,
            n_selected=len(columns),
            selection_fallback=fallback,
            oob_accuracy=oob,
            redraws=split.redraws,
        )

    def run_experiment(self, fm: FeatureMatrix, config: Optional[ExperimentConfig] = None) -> ExperimentReport:
        """Repeat split, normalize, select, train and evaluate; aggregate mean ± std"""
        config = config or ExperimentConfig.from_settings(settings)
        fm = filter_scenario(fm, config.scenario)
        counts = np.bincount(fm.labels, minlength=2)
        if counts.min() < MIN_ROWS_PER_CLASS:
            raise ExperimentError(
                f"Need at least {MIN_ROWS_PER_CLASS} rows per class, got "
                f"{counts[0]} healthy and {counts[1]} pathological"
            )

        logger.info("Running %d repetitions with %s on %d recordings (%s scenario)",
                    config.repetitions, config.classifier.value, len(fm), config.scenario.value)
        workers = max(1, min(self.workers, config.repetitions))
        indices = range(config.repetitions)
        if workers == 1:
            results = [self.run_repetition(fm, config, i) for i in indices]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda i: self.run_repetition(fm, config, i), indices))

        acc = summarize([r.acc for r in results])
        threshold = rule_of_30(len(fm))
        report = ExperimentReport(
            config=config,
            extraction=fm.extraction,
            n_recordings=len(fm),
            n_features=len(fm.columns),
            repetitions=results,
            acc=acc,
            sen=summarize([r.sen for r in results]),
            spe=summarize([r.spe for r in results]),
            n_selected=summarize([r.n_selected for r in results]),
            rule_of_30_threshold=threshold,
            reliable=(100.0 - acc.mean) >= threshold,
            skipped_recordings=list(fm.skipped),
        )
        if not report.reliable:
            logger.warning("Mean error rate %.2f%% is below the Rule-of-30 threshold %.2f%% for %d recordings",
                           100.0 - acc.mean, threshold, len(fm))
        return report


def format_report_table(report: ExperimentReport) -> str:
    """Human-readable summary row: classifier, scenario, ACC, SEN, SPE, selected features"""
    header = f"{'classifier':<10} {'scenario':<8} {'ACC [%]':>12} {'SEN [%]':>12} {'SPE [%]':>12} {'features':>14}"
    row = (
        f"{report.config.classifier.value:<10} {report.config.scenario.value:<8} "
        f"{format_mean_std(report.acc):>12} {format_mean_std(report.sen):>12} "
        f"{format_mean_std(report.spe):>12} {format_mean_std(report.n_selected, 0):>14}"
    )
    note = (
        f"Rule of 30: errors below {report.rule_of_30_threshold:.2f}% are unreliable for "
        f"{report.n_recordings} recordings ({'reliable' if report.reliable else 'UNRELIABLE'})"
    )
    return "\n".join([header, row, note])


# Global experiment engine instance
experiment_engine = ExperimentEngine()
