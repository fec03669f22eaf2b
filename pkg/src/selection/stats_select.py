"""
Feature matrix container, train-fitted z-score normalization and
Mann-Whitney-U filter selection
"""

import warnings
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import Field, model_validator
from scipy import stats

from src.schemas.models import ArraySchema, BaseSchema, Label
from src.utils.exceptions import InsufficientDataError, ParameterError
from src.utils.helpers import ensure_parent_dir, read_json, sidecar_path, write_json
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

META_COLUMNS = ["path", "label", "speaker", "gender"]
EXACT_LIMIT = 20
TOP_COUNT = 10


class FeatureMatrix(BaseSchema):
    """Recordings x named features, with per-row metadata.

    `meta` carries path, label, speaker and gender; `features` holds the
    numeric columns with NaN marking missing values.
    """
    features: pd.DataFrame = Field(..., description="Numeric feature table")
    meta: pd.DataFrame = Field(..., description="Per-row path, label, speaker and gender")
    extraction: Optional[Dict[str, Any]] = Field(default=None, description="Extraction config echo")
    skipped: List[str] = Field(default_factory=list, description="Recordings skipped at extraction")

    @model_validator(mode="after")
    def validate_alignment(self) -> "FeatureMatrix":
        if len(self.features) != len(self.meta):
            raise ValueError("features and meta must have the same number of rows")
        if self.features.columns.has_duplicates:
            raise ValueError("feature column names must be unique")
        if "label" not in self.meta.columns:
            raise ValueError("meta must contain a label column")
        unknown = set(self.meta["label"]) - {label.value for label in Label}
        if unknown:
            raise ValueError(f"unknown labels: {sorted(unknown)}")
        return self

    @property
    def columns(self) -> List[str]:
        return list(self.features.columns)

    @property
    def labels(self) -> np.ndarray:
        """1 for pathological, 0 for healthy"""
        return (self.meta["label"].to_numpy() == Label.PATHOLOGICAL.value).astype(int)

    def __len__(self) -> int:
        return len(self.features)

    def subset(self, rows=None, columns: Optional[Sequence[str]] = None) -> "FeatureMatrix":
        """Positional row subset and/or named column subset"""
        features = self.features if rows is None else self.features.iloc[rows]
        meta = self.meta if rows is None else self.meta.iloc[rows]
        if columns is not None:
            features = features.loc[:, list(columns)]
        return FeatureMatrix(
            features=features.reset_index(drop=True),
            meta=meta.reset_index(drop=True),
            extraction=self.extraction,
            skipped=list(self.skipped),
        )

    def with_features(self, features: pd.DataFrame) -> "FeatureMatrix":
        return FeatureMatrix(
            features=features.reset_index(drop=True),
            meta=self.meta.reset_index(drop=True),
            extraction=self.extraction,
            skipped=list(self.skipped),
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        """CSV with metadata columns first; missing values become empty cells"""
        path = ensure_parent_dir(path)
        table = pd.concat([self.meta.reset_index(drop=True), self.features.reset_index(drop=True)], axis=1)
        table.to_csv(path, index=False, na_rep="", float_format="%.17g")
        write_json(sidecar_path(path), {
            "meta_columns": list(self.meta.columns),
            "n_rows": len(self),
            "n_features": self.features.shape[1],
            "extraction": self.extraction,
            "skipped_recordings": self.skipped,
        })
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "FeatureMatrix":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Feature matrix not found: {path}")
        sidecar: Dict[str, Any] = {}
        if sidecar_path(path).exists():
            sidecar = read_json(sidecar_path(path))
        meta_columns = sidecar.get("meta_columns", META_COLUMNS)

        table = pd.read_csv(path, dtype={c: str for c in meta_columns}, keep_default_na=False,
                            na_values=[""])
        present = [c for c in meta_columns if c in table.columns]
        features = table.drop(columns=present).apply(pd.to_numeric, errors="coerce").astype(float)
        return cls(
            features=features,
            meta=table[present].copy(),
            extraction=sidecar.get("extraction"),
            skipped=sidecar.get("skipped_recordings", []),
        )


class ZScaler(ArraySchema):
    """Per-column training mean and sample std"""
    columns: List[str] = Field(..., description="Columns kept (non-constant in training)")
    mean: np.ndarray = Field(..., description="Training means of kept columns")
    std: np.ndarray = Field(..., description="Training sample stds of kept columns")
    constant: List[str] = Field(default_factory=list, description="Columns dropped as constant")


def zscore_fit(train: FeatureMatrix) -> ZScaler:
    if len(train) == 0:
        raise InsufficientDataError("cannot fit a scaler on an empty training set")
    values = train.features.to_numpy(dtype=float)
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        # all-missing columns yield NaN statistics and are dropped below
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(values, axis=0)
        finite_counts = np.sum(np.isfinite(values), axis=0)
        std = np.where(finite_counts > 1, np.nanstd(values, axis=0, ddof=1), 0.0)

    keep = np.isfinite(std) & (std > 0)
    columns = train.columns
    constant = [c for c, k in zip(columns, keep) if not k]
    if constant:
        logger.debug("Dropping %d constant training columns", len(constant))
    return ZScaler(
        columns=[c for c, k in zip(columns, keep) if k],
        mean=mean[keep],
        std=std[keep],
        constant=constant,
    )


def zscore_apply(scaler: ZScaler, fm: FeatureMatrix) -> FeatureMatrix:
    """Transform with the training statistics; constant columns are dropped"""
    missing = [c for c in scaler.columns if c not in fm.features.columns]
    if missing:
        raise ParameterError(f"matrix lacks {len(missing)} scaler column(s), e.g. {missing[0]}")
    values = fm.features.loc[:, scaler.columns].to_numpy(dtype=float)
    scaled = (values - scaler.mean) / scaler.std
    return fm.with_features(pd.DataFrame(scaled, columns=scaler.columns))


class MannWhitneyResult(NamedTuple):
    u: float
    p_value: float


def mann_whitney_u(a, b) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U of sample a against sample b.

    Exact p for small untied samples, otherwise the normal approximation
    with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("both samples must be nonempty")

    pooled = np.concatenate((a, b))
    if np.ptp(pooled) == 0:
        return MannWhitneyResult(u=a.size * b.size / 2.0, p_value=1.0)

    tied = np.unique(pooled).size < pooled.size
    method = "exact" if pooled.size <= EXACT_LIMIT and not tied else "asymptotic"
    result = stats.mannwhitneyu(a, b, alternative="two-sided", method=method, use_continuity=True)
    return MannWhitneyResult(u=float(result.statistic), p_value=float(min(1.0, result.pvalue)))


class SelectionResult(NamedTuple):
    selected: List[str]
    p_values: pd.Series
    excluded_missing: List[str]

    def top(self, count: int = TOP_COUNT) -> pd.Series:
        return self.p_values.head(count)


def column_p_values(fm: FeatureMatrix, columns: Optional[Sequence[str]] = None) -> pd.Series:
    """Mann-Whitney p-value per column, healthy vs pathological, NaN rows dropped"""
    columns = list(columns) if columns is not None else fm.columns
    y = fm.labels
    values = fm.features.loc[:, columns].to_numpy(dtype=float)
    healthy, pathological = values[y == 0], values[y == 1]
    p = np.full(len(columns), np.nan)

    complete = np.all(np.isfinite(values), axis=0)
    span = np.ptp(values, axis=0) if len(values) else np.zeros(len(columns))
    both = len(healthy) > 0 and len(pathological) > 0
    bulk = complete & (span > 0) & both & (len(values) > EXACT_LIMIT)
    if np.any(bulk):
        # large untruncated columns share one vectorized asymptotic test
        result = stats.mannwhitneyu(
            healthy[:, bulk], pathological[:, bulk],
            alternative="two-sided", method="asymptotic", use_continuity=True, axis=0,
        )
        p[bulk] = np.minimum(1.0, result.pvalue)

    for j in np.flatnonzero(~bulk):
        a = healthy[:, j][np.isfinite(healthy[:, j])]
        b = pathological[:, j][np.isfinite(pathological[:, j])]
        if a.size and b.size:
            p[j] = mann_whitney_u(a, b).p_value

    return pd.Series(p, index=columns, name="p_value")


def select_features(
    fm: FeatureMatrix,
    alpha: float = 0.05,
    missing_threshold: float = 0.10,
) -> SelectionResult:
    """Keep columns with p < alpha after excluding columns with too many missing values"""
    y = fm.labels
    if len(np.unique(y)) < 2:
        raise InsufficientDataError("feature selection needs both classes")

    missing_fraction = fm.features.isna().mean(axis=0)
    excluded = list(missing_fraction.index[missing_fraction > missing_threshold])
    candidates = [c for c in fm.columns if missing_fraction[c] <= missing_threshold]

    p_values = column_p_values(fm, candidates).dropna()
    p_values = p_values.sort_values(kind="mergesort")
    selected = [c for c in candidates if c in p_values.index and p_values[c] < alpha]
    logger.debug(
        "Selected %d of %d columns at alpha=%s (%d excluded for missing values)",
        len(selected), len(fm.columns), alpha, len(excluded),
    )
    return SelectionResult(selected=selected, p_values=p_values, excluded_missing=excluded)


def write_p_values(result: SelectionResult, path: Union[str, Path]) -> Path:
    """(feature_name, p_value) sorted ascending"""
    path = ensure_parent_dir(path)
    frame = result.p_values.rename_axis("feature_name").reset_index()
    frame.to_csv(path, index=False, float_format="%.6g")
    return path
