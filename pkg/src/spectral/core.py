"""
Shared transforms and scalar primitives: DFT, cepstra, CPP, regression,
energy operators, histogram entropies, zero-crossing rate and LPC
"""

import math
from typing import Optional

import numpy as np
from pydantic import Field, field_validator
from scipy import fft as sp_fft
from scipy import linalg, stats

from src.schemas.models import ArraySchema, BaseSchema
from src.utils.exceptions import DegenerateInputError, InsufficientDataError

LOG_EPS = 1e-12


class ComplexSpectrum(ArraySchema):
    """DFT bins of one frame"""
    bins: np.ndarray = Field(..., description="Complex DFT bins")
    rate: float = Field(default=1.0, gt=0, description="Sampling rate in Hz")

    @field_validator("bins", mode="before")
    @classmethod
    def validate_bins(cls, v):
        bins = np.array(v, dtype=complex)
        bins.setflags(write=False)
        return bins


class Cepstrum(ArraySchema):
    """Real or complex cepstrum of one frame"""
    values: np.ndarray = Field(..., description="Quefrency-domain values")
    rate: float = Field(default=1.0, gt=0, description="Sampling rate in Hz")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v):
        values = np.array(v)
        if not np.all(np.isfinite(values)):
            raise ValueError("cepstrum values must be finite")
        values.setflags(write=False)
        return values


class RegressionLine(BaseSchema):
    """Least-squares line over integer abscissae"""
    slope: float = Field(..., description="Slope")
    offset: float = Field(..., description="Value of the line at abscissa 0")
    rss_error: float = Field(..., ge=0, description="Residual sum of squares")

    def at(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.offset


def dft(x, rate: float = 1.0) -> ComplexSpectrum:
    """Forward DFT with the e^{-j2πkn/N} kernel and no 1/N factor"""
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise InsufficientDataError("dft needs at least one sample")
    return ComplexSpectrum(bins=sp_fft.fft(x), rate=rate)


def power_spectrum(x) -> np.ndarray:
    return np.abs(dft(x).bins) ** 2


def _check_cepstrum_input(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InsufficientDataError("cepstrum needs at least two samples")
    if not np.any(x):
        raise DegenerateInputError("cepstrum of an all-zero sequence is undefined")
    return x


def real_cepstrum_values(x, axis: int = -1) -> np.ndarray:
    """Array form of the real cepstrum; works on stacked frames"""
    spectrum = sp_fft.fft(x, axis=axis)
    return sp_fft.ifft(np.log(np.abs(spectrum) + LOG_EPS), axis=axis).real


def complex_cepstrum_values(x, axis: int = -1) -> np.ndarray:
    """Array form of the complex cepstrum with π-jump phase unwrapping"""
    spectrum = sp_fft.fft(x, axis=axis)
    log_spectrum = np.log(np.abs(spectrum) + LOG_EPS) + 1j * np.unwrap(np.angle(spectrum), axis=axis)
    return sp_fft.ifft(log_spectrum, axis=axis)


def real_cepstrum(x, rate: float = 1.0) -> Cepstrum:
    x = _check_cepstrum_input(x)
    return Cepstrum(values=real_cepstrum_values(x), rate=rate)


def complex_cepstrum(x, rate: float = 1.0) -> Cepstrum:
    x = _check_cepstrum_input(x)
    return Cepstrum(values=complex_cepstrum_values(x), rate=rate)


def quefrency_start(rate: float, f_max: float) -> int:
    """First quefrency index searched for the pitch peak"""
    return int(round(rate / f_max))


def fit_line(y, x_start: int = 0, x_end: Optional[int] = None) -> RegressionLine:
    """Ordinary least squares of y[x_start..x_end] on the integer indices"""
    y = np.asarray(y, dtype=float)
    if x_end is None:
        x_end = y.size - 1
    if x_end - x_start + 1 < 2:
        raise InsufficientDataError("a regression line needs at least two points")

    x = np.arange(x_start, x_end + 1, dtype=float)
    segment = y[x_start:x_end + 1]
    fit = stats.linregress(x, segment)
    residuals = segment - (fit.slope * x + fit.intercept)
    return RegressionLine(
        slope=float(fit.slope),
        offset=float(fit.intercept),
        rss_error=float(np.sum(residuals ** 2)),
    )


def relative_peak_height(y, i: int, line: RegressionLine) -> float:
    """(y[i] - r[i]) / y[i]; NaN when y[i] is zero"""
    peak = float(y[i])
    if peak == 0.0:
        return float("nan")
    return (peak - float(line.at(i))) / peak


def cepstral_peak_prominence(c, rate: float, f_max: float) -> float:
    """Relative height of the cepstral peak above its regression line.

    The real cepstrum is even, so the search covers quefrencies from
    rate/f_max up to N/2.
    """
    c = np.asarray(getattr(c, "values", c)).real
    start = quefrency_start(rate, f_max)
    stop = c.size // 2
    if stop - start + 1 < 2:
        raise InsufficientDataError(
            f"cepstrum of length {c.size} too short for f_max={f_max} Hz at {rate} Hz"
        )
    i = start + int(np.argmax(c[start:stop + 1]))
    line = fit_line(c, start, stop)
    return relative_peak_height(c, i, line)


def ucpp(frame, rate: float, f_max: float) -> float:
    """Unsmoothed CPP: CPP of the raw real cepstrum of one frame"""
    return cepstral_peak_prominence(real_cepstrum(frame, rate), rate, f_max)


def tkeo(x) -> np.ndarray:
    """Teager-Kaiser energy x[n]^2 - x[n-1]x[n+1] for interior n"""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("tkeo needs at least three samples")
    return x[1:-1] ** 2 - x[:-2] * x[2:]


def seo(x) -> np.ndarray:
    """Squared energy operator"""
    return np.asarray(x, dtype=float) ** 2


def sign_changes(x) -> float:
    """Σ|sgn x[n] - sgn x[n-1]| with sgn(0) = 0"""
    return float(np.sum(np.abs(np.diff(np.sign(np.asarray(x, dtype=float))))))


def zcr(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise InsufficientDataError("zcr needs at least one sample")
    return sign_changes(x) / x.size


def _histogram_probabilities(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise InsufficientDataError("entropy needs at least one sample")
    if np.ptp(x) == 0:
        return np.ones(1)
    counts, _ = np.histogram(x, bins=math.ceil(math.sqrt(x.size)), range=(x.min(), x.max()))
    p = counts[counts > 0] / x.size
    return p


def shannon_entropy(x) -> float:
    """Shannon entropy in bits over ⌈√N⌉ equal-width bins"""
    p = _histogram_probabilities(x)
    return float(-np.sum(p * np.log2(p))) + 0.0


def renyi2_entropy(x) -> float:
    """Second-order Rényi entropy in bits over ⌈√N⌉ equal-width bins"""
    p = _histogram_probabilities(x)
    return float(-np.log2(np.sum(p ** 2))) + 0.0


def lpc(x, order: int) -> np.ndarray:
    """Linear prediction coefficients [1, a1..ap] by the autocorrelation method"""
    x = np.asarray(x, dtype=float)
    if x.size <= order:
        raise InsufficientDataError(f"lpc of order {order} needs more than {order} samples")
    n_fft = sp_fft.next_fast_len(2 * x.size - 1)
    spectrum = sp_fft.rfft(x, n=n_fft)
    r = sp_fft.irfft(np.abs(spectrum) ** 2, n=n_fft)[:order + 1]
    if r[0] <= 0:
        raise DegenerateInputError("lpc of a zero-energy sequence is undefined")
    try:
        a = linalg.solve_toeplitz(r[:order], -r[1:order + 1])
    except linalg.LinAlgError as e:
        raise DegenerateInputError(f"singular autocorrelation matrix: {e}") from e
    return np.concatenate(([1.0], a))
