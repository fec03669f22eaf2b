import math

import numpy as np
import pytest

from src.aggregation.statistics import (
    FeatureVector,
    StatisticId,
    aggregate,
    sequence_column,
    split_column,
)


def _percentile(sorted_x, p):
    h = (sorted_x.size - 1) * p / 100.0
    lo = int(math.floor(h))
    if lo + 1 >= sorted_x.size:
        return sorted_x[-1]
    return sorted_x[lo] + (h - lo) * (sorted_x[lo + 1] - sorted_x[lo])


def _histogram(x):
    bins = math.ceil(math.sqrt(x.size))
    lo, hi = x.min(), x.max()
    width = (hi - lo) / bins
    idx = np.minimum(((x - lo) / width).astype(int), bins - 1)
    return np.bincount(idx, minlength=bins), lo, width


def _naive(x):
    n = x.size
    s = np.sort(x)
    hi, lo = s[-1], s[0]
    peak = max(abs(hi), abs(lo))
    mean = sum(x) / n
    median = _percentile(s, 50)
    std = math.sqrt(sum((v - mean) ** 2 for v in x) / (n - 1))
    var = std ** 2
    counts, h_lo, width = _histogram(x)
    k = int(np.argmax(counts))
    mode = h_lo + (k + 0.5) * width
    p = counts[counts > 0] / n
    m = {k: sum((v - mean) ** k for v in x) / n for k in (2, 3, 4, 5, 6)}
    i = np.arange(n)
    slope = np.sum((i - i.mean()) * (x - mean)) / np.sum((i - i.mean()) ** 2)
    offset = mean - slope * i.mean()
    positive = bool(np.all(x > 0))

    out = {
        "max": hi,
        "min": lo,
        "pos_max": float(np.argmax(x)),
        "pos_min": float(np.argmin(x)),
        "rel_pos_max": np.argmax(x) / n,
        "rel_pos_min": np.argmin(x) / n,
        "range": hi - lo,
        "rel_range": (hi - lo) / peak,
        "iqr": _percentile(s, 75) - _percentile(s, 25),
        "rel_iqr": (_percentile(s, 75) - _percentile(s, 25)) / peak,
        "idr": _percentile(s, 90) - _percentile(s, 10),
        "rel_idr": (_percentile(s, 90) - _percentile(s, 10)) / peak,
        "ipr": _percentile(s, 99) - _percentile(s, 1),
        "rel_ipr": (_percentile(s, 99) - _percentile(s, 1)) / peak,
        "studentized_range": (hi - lo) / std,
        "mean": mean,
        "geo_mean": math.exp(np.mean(np.log(x))) if positive else np.nan,
        "harm_mean": n / np.sum(1 / x) if positive else np.nan,
        "median": median,
        "mode": mode,
        "var": var,
        "std": std,
        "mad_mean": np.mean(np.abs(x - mean)),
        "mad_median": _percentile(np.sort(np.abs(x - median)), 50),
        "geo_std": math.exp(np.std(np.log(x), ddof=1)) if positive else np.nan,
        "coef_var": std / mean,
        "index_dispersion": var / mean,
        "moment_3": m[3],
        "moment_4": m[4],
        "moment_5": m[5],
        "moment_6": m[6],
        "kurtosis": m[4] / m[2] ** 2,
        "skewness": m[3] / m[2] ** 1.5,
        "pearson_skew_1": (mean - mode) / std,
        "pearson_skew_2": 3 * (mean - median) / std,
        "quartile_1": _percentile(s, 25),
        "quartile_3": _percentile(s, 75),
        "regr_slope": slope,
        "regr_offset": offset,
        "regr_error": np.sum((x - (slope * i + offset)) ** 2),
        "modulation": (hi - lo) / (hi + lo),
        "shannon_entropy": -np.sum(p * np.log2(p)),
        "renyi2_entropy": -np.log2(np.sum(p ** 2)),
    }
    for level in (10, 20, 30, 40, 50):
        cut = int(level / 200.0 * n)
        out[f"trimmed_mean_{level}"] = np.mean(s[cut:n - cut])
    for level in (1, 5, 10, 20, 30, 40, 60, 70, 80, 90, 95, 99):
        out[f"percentile_{level}"] = _percentile(s, level)
    return out


def test_sixty_statistics():
    assert len(StatisticId) == 60
    assert len(aggregate([1.0, 2.0, 3.0])) == 60


def test_short_sequence_example():
    out = aggregate([1, 2, 3])
    assert out[StatisticId.MEAN] == 2
    assert out[StatisticId.MEDIAN] == 2
    assert out[StatisticId.RANGE] == 2
    assert out[StatisticId.STD] == pytest.approx(1.0)
    assert out[StatisticId.QUARTILE_1] == pytest.approx(1.5)
    assert out[StatisticId.MODULATION] == pytest.approx(0.5)


def test_constant_sequence():
    out = aggregate([5, 5, 5])
    assert out[StatisticId.STD] == 0
    assert np.isnan(out[StatisticId.STUDENTIZED_RANGE])
    assert np.isnan(out[StatisticId.SKEWNESS])
    assert out[StatisticId.MODULATION] == 0
    assert out[StatisticId.MODE] == 5
    assert out[StatisticId.SHANNON_ENTROPY] == 0


def test_single_value_and_empty_sequences():
    single = aggregate([4.0])
    assert single[StatisticId.MEAN] == 4.0
    assert np.isnan(single[StatisticId.VAR])
    assert np.isnan(single[StatisticId.REGR_SLOPE])

    empty = aggregate([np.nan, np.inf])
    assert all(np.isnan(v) for v in empty.values())


@pytest.mark.parametrize("positive", [True, False])
@pytest.mark.parametrize("length", [100, 2])
def test_matches_naive_recomputation(rng, positive, length):
    for _ in range(100):
        x = rng.uniform(0.5, 3.0, length) if positive else rng.standard_normal(length)
        out = aggregate(x)
        expected = _naive(x)
        assert set(expected) == {sid.value for sid in StatisticId}
        for sid in StatisticId:
            np.testing.assert_allclose(out[sid], expected[sid.value], rtol=1e-10, atol=1e-10,
                                       equal_nan=True, err_msg=sid.value)


def test_affine_equivariance(rng):
    x = rng.standard_normal(50)
    a, b = 2.5, -1.0
    base, moved = aggregate(x), aggregate(a * x + b)
    assert moved[StatisticId.MEAN] == pytest.approx(a * base[StatisticId.MEAN] + b)
    assert moved[StatisticId.STD] == pytest.approx(abs(a) * base[StatisticId.STD])
    assert moved[StatisticId.SKEWNESS] == pytest.approx(base[StatisticId.SKEWNESS])


def test_order_free_statistics_ignore_permutation(rng):
    x = rng.standard_normal(64)
    base, shuffled = aggregate(x), aggregate(rng.permutation(x))
    for sid in (StatisticId.MEAN, StatisticId.MEDIAN, StatisticId.STD, StatisticId.IQR,
                StatisticId.KURTOSIS, StatisticId.TRIMMED_MEAN_20, StatisticId.PERCENTILE_90):
        assert shuffled[sid] == pytest.approx(base[sid])


def test_column_names():
    assert sequence_column("TKEO", StatisticId.MEAN) == "TKEO__mean"
    assert sequence_column("PSI", StatisticId.STD, 3) == "PSI[3]__std"
    assert split_column("PSI[3]__std") == ("PSI[3]", "std")
    assert split_column("MSER") == ("MSER", None)


def test_feature_vector_layout():
    fv = FeatureVector()
    fv.add_scalar("MSER", 1.5)
    fv.add_sequence("BMD", [1.0, 2.0, 4.0])
    fv.add_matrix("PSI", np.ones((2, 5)))
    fv.add_sequence_placeholder("AE(gaussian)")
    assert len(fv) == 1 + 60 + 2 * 60 + 60
    assert fv.names()[0] == "MSER"
    assert "PSI[2]__mean" in fv.entries
    assert np.isnan(fv.entries["AE(gaussian)__mean"])
    with pytest.raises(KeyError):
        fv.add_scalar("MSER", 0.0)
