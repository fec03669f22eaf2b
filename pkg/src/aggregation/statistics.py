"""
High-level statistics: every local-feature sequence becomes 60 named scalars
"""

import math
from enum import Enum
from typing import Dict, Optional

import numpy as np
from pydantic import Field
from scipy import stats

from src.schemas.models import BaseSchema
from src.spectral.core import fit_line, renyi2_entropy, shannon_entropy

NAME_SEPARATOR = "__"
NAN = float("nan")


class StatisticId(str, Enum):
    MAX = "max"
    MIN = "min"
    POS_MAX = "pos_max"
    POS_MIN = "pos_min"
    REL_POS_MAX = "rel_pos_max"
    REL_POS_MIN = "rel_pos_min"
    RANGE = "range"
    REL_RANGE = "rel_range"
    IQR = "iqr"
    REL_IQR = "rel_iqr"
    IDR = "idr"
    REL_IDR = "rel_idr"
    IPR = "ipr"
    REL_IPR = "rel_ipr"
    STUDENTIZED_RANGE = "studentized_range"
    MEAN = "mean"
    GEO_MEAN = "geo_mean"
    HARM_MEAN = "harm_mean"
    TRIMMED_MEAN_10 = "trimmed_mean_10"
    TRIMMED_MEAN_20 = "trimmed_mean_20"
    TRIMMED_MEAN_30 = "trimmed_mean_30"
    TRIMMED_MEAN_40 = "trimmed_mean_40"
    TRIMMED_MEAN_50 = "trimmed_mean_50"
    MEDIAN = "median"
    MODE = "mode"
    VAR = "var"
    STD = "std"
    MAD_MEAN = "mad_mean"
    MAD_MEDIAN = "mad_median"
    GEO_STD = "geo_std"
    COEF_VAR = "coef_var"
    INDEX_DISPERSION = "index_dispersion"
    MOMENT_3 = "moment_3"
    MOMENT_4 = "moment_4"
    MOMENT_5 = "moment_5"
    MOMENT_6 = "moment_6"
    KURTOSIS = "kurtosis"
    SKEWNESS = "skewness"
    PEARSON_SKEW_1 = "pearson_skew_1"
    PEARSON_SKEW_2 = "pearson_skew_2"
    PERCENTILE_1 = "percentile_1"
    PERCENTILE_5 = "percentile_5"
    PERCENTILE_10 = "percentile_10"
    PERCENTILE_20 = "percentile_20"
    PERCENTILE_30 = "percentile_30"
    PERCENTILE_40 = "percentile_40"
    PERCENTILE_60 = "percentile_60"
    PERCENTILE_70 = "percentile_70"
    PERCENTILE_80 = "percentile_80"
    PERCENTILE_90 = "percentile_90"
    PERCENTILE_95 = "percentile_95"
    PERCENTILE_99 = "percentile_99"
    QUARTILE_1 = "quartile_1"
    QUARTILE_3 = "quartile_3"
    REGR_SLOPE = "regr_slope"
    REGR_OFFSET = "regr_offset"
    REGR_ERROR = "regr_error"
    MODULATION = "modulation"
    SHANNON_ENTROPY = "shannon_entropy"
    RENYI2_ENTROPY = "renyi2_entropy"


TRIM_LEVELS = (10, 20, 30, 40, 50)
PERCENTILE_LEVELS = (1, 5, 10, 20, 30, 40, 60, 70, 80, 90, 95, 99)


def _div(numerator: float, denominator: float) -> float:
    if denominator == 0 or not np.isfinite(denominator):
        return NAN
    return float(numerator / denominator)


def histogram_mode(x: np.ndarray) -> float:
    """Midpoint of the densest of ⌈√N⌉ equal-width bins"""
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return lo
    counts, edges = np.histogram(x, bins=math.ceil(math.sqrt(x.size)), range=(lo, hi))
    k = int(np.argmax(counts))
    return float(0.5 * (edges[k] + edges[k + 1]))


def aggregate(seq) -> Dict[StatisticId, float]:
    """All 60 statistics of a sequence; undefined ones are NaN.

    Non-finite entries are dropped first, so positions index the finite
    subsequence.
    """
    x = np.asarray(seq, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size == 0:
        return {sid: NAN for sid in StatisticId}

    n = x.size
    out: Dict[StatisticId, float] = {}
    constant = float(np.ptp(x)) == 0.0
    peak = float(np.max(np.abs(x)))

    hi, lo = float(x.max()), float(x.min())
    out[StatisticId.MAX] = hi
    out[StatisticId.MIN] = lo
    pos_max, pos_min = int(np.argmax(x)), int(np.argmin(x))
    out[StatisticId.POS_MAX] = float(pos_max)
    out[StatisticId.POS_MIN] = float(pos_min)
    out[StatisticId.REL_POS_MAX] = pos_max / n
    out[StatisticId.REL_POS_MIN] = pos_min / n

    pct = {p: float(v) for p, v in zip(
        (1, 5, 10, 20, 25, 30, 40, 60, 70, 75, 80, 90, 95, 99),
        np.percentile(x, (1, 5, 10, 20, 25, 30, 40, 60, 70, 75, 80, 90, 95, 99)),
    )}

    mean = float(np.mean(x))
    median = float(np.median(x))
    mode = histogram_mode(x)
    if n < 2:
        std = NAN
    else:
        std = 0.0 if constant else float(np.std(x, ddof=1))
    var = std ** 2 if np.isfinite(std) else NAN

    spread = {
        StatisticId.RANGE: hi - lo,
        StatisticId.IQR: pct[75] - pct[25],
        StatisticId.IDR: pct[90] - pct[10],
        StatisticId.IPR: pct[99] - pct[1],
    }
    relative = {
        StatisticId.RANGE: StatisticId.REL_RANGE,
        StatisticId.IQR: StatisticId.REL_IQR,
        StatisticId.IDR: StatisticId.REL_IDR,
        StatisticId.IPR: StatisticId.REL_IPR,
    }
    for sid, value in spread.items():
        out[sid] = value
        out[relative[sid]] = _div(value, peak)
    out[StatisticId.STUDENTIZED_RANGE] = _div(hi - lo, std)

    positive = bool(np.all(x > 0))
    out[StatisticId.MEAN] = mean
    out[StatisticId.GEO_MEAN] = float(stats.gmean(x)) if positive else NAN
    out[StatisticId.HARM_MEAN] = float(stats.hmean(x)) if positive else NAN
    for level in TRIM_LEVELS:
        out[StatisticId(f"trimmed_mean_{level}")] = float(stats.trim_mean(x, level / 200.0))
    out[StatisticId.MEDIAN] = median
    out[StatisticId.MODE] = mode

    out[StatisticId.VAR] = var
    out[StatisticId.STD] = std
    out[StatisticId.MAD_MEAN] = float(np.mean(np.abs(x - mean)))
    out[StatisticId.MAD_MEDIAN] = float(np.median(np.abs(x - median)))
    if positive and n > 1:
        out[StatisticId.GEO_STD] = 1.0 if constant else float(stats.gstd(x))
    else:
        out[StatisticId.GEO_STD] = NAN
    out[StatisticId.COEF_VAR] = _div(std, mean)
    out[StatisticId.INDEX_DISPERSION] = _div(var, mean)

    for order in (3, 4, 5, 6):
        out[StatisticId(f"moment_{order}")] = 0.0 if constant else float(stats.moment(x, order))
    m2 = 0.0 if constant else float(stats.moment(x, 2))
    out[StatisticId.KURTOSIS] = _div(out[StatisticId.MOMENT_4], m2 ** 2)
    out[StatisticId.SKEWNESS] = _div(out[StatisticId.MOMENT_3], m2 ** 1.5)
    out[StatisticId.PEARSON_SKEW_1] = _div(mean - mode, std)
    out[StatisticId.PEARSON_SKEW_2] = _div(3.0 * (mean - median), std)

    for level in PERCENTILE_LEVELS:
        out[StatisticId(f"percentile_{level}")] = pct[level]
    out[StatisticId.QUARTILE_1] = pct[25]
    out[StatisticId.QUARTILE_3] = pct[75]

    if n >= 2:
        line = fit_line(x)
        out[StatisticId.REGR_SLOPE] = line.slope
        out[StatisticId.REGR_OFFSET] = line.offset
        out[StatisticId.REGR_ERROR] = line.rss_error
    else:
        out[StatisticId.REGR_SLOPE] = out[StatisticId.REGR_OFFSET] = out[StatisticId.REGR_ERROR] = NAN

    out[StatisticId.MODULATION] = _div(hi - lo, hi + lo)
    out[StatisticId.SHANNON_ENTROPY] = shannon_entropy(x)
    out[StatisticId.RENYI2_ENTROPY] = renyi2_entropy(x)

    return {sid: out[sid] for sid in StatisticId}


def sequence_column(local: str, statistic: StatisticId, row: Optional[int] = None) -> str:
    """'<local>__<stat>' or '<local>[row]__<stat>'"""
    base = local if row is None else f"{local}[{row}]"
    return f"{base}{NAME_SEPARATOR}{StatisticId(statistic).value}"


def split_column(name: str):
    """Inverse of sequence_column: (local, statistic or None)"""
    local, sep, statistic = name.rpartition(NAME_SEPARATOR)
    if not sep:
        return name, None
    return local, statistic


class FeatureVector(BaseSchema):
    """Ordered named feature values of one recording"""
    entries: Dict[str, float] = Field(default_factory=dict, description="Feature name to value (NaN = missing)")

    def add_scalar(self, name: str, value: float) -> None:
        self._put(name, value)

    def add_sequence(self, name: str, seq) -> None:
        for sid, value in aggregate(seq).items():
            self._put(sequence_column(name, sid), value)

    def add_matrix(self, name: str, matrix) -> None:
        """Aggregate each row separately, rows numbered from 1"""
        for row, values in enumerate(np.atleast_2d(np.asarray(matrix, dtype=float)), start=1):
            for sid, value in aggregate(values).items():
                self._put(sequence_column(name, sid, row), value)

    def add_sequence_placeholder(self, name: str, rows: Optional[int] = None) -> None:
        """Reserve the columns of a sequence or matrix feature as missing"""
        for row in ([None] if rows is None else range(1, rows + 1)):
            for sid in StatisticId:
                self._put(sequence_column(name, sid, row), NAN)

    def _put(self, name: str, value: float) -> None:
        if name in self.entries:
            raise KeyError(f"duplicate feature name: {name}")
        self.entries[name] = float(value) if value is not None else NAN

    def names(self):
        return list(self.entries)

    def values(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=float)

    def __len__(self) -> int:
        return len(self.entries)
