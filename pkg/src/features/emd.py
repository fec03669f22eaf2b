"""
Empirical mode decomposition and the IMF-derived features:
IMF-SNR, IMF-NSR, IMF-FD, IMF-CPP and IMF-GNE
"""

from typing import Optional, Tuple

import numpy as np
from pydantic import Field, model_validator
from scipy import fft as sp_fft
from scipy.interpolate import CubicSpline
from scipy.signal import correlate, hilbert, lfilter

from src.audio.wav_io import frame_samples
from src.schemas.models import ArraySchema, ImfParameter, Signal, WindowKind
from src.spectral.core import (
    LOG_EPS,
    cepstral_peak_prominence,
    lpc,
    real_cepstrum,
    renyi2_entropy,
    seo,
    shannon_entropy,
    sign_changes,
    tkeo,
    zcr,
)
from src.utils.exceptions import DegenerateInputError, InsufficientDataError, ParameterError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

MIN_LENGTH = 16
MIRRORED_EXTREMA = 2
GNE_BAND_HZ = 1000.0
GNE_FIRST_CENTER_HZ = 500.0


class ImfSet(ArraySchema):
    """Intrinsic mode functions f_1..f_I (one per row) and the final residual"""
    imfs: np.ndarray = Field(..., description="I x N matrix, I may be zero")
    residual: np.ndarray = Field(..., description="Input minus the sum of the IMFs")

    @model_validator(mode="after")
    def validate_shape(self) -> "ImfSet":
        if self.imfs.ndim != 2 or self.imfs.shape[1] != self.residual.size:
            raise ValueError("every IMF must have the length of the residual")
        return self

    @property
    def count(self) -> int:
        return int(self.imfs.shape[0])

    def first(self) -> np.ndarray:
        if self.count < 1:
            raise InsufficientDataError("decomposition produced no IMF")
        return self.imfs[0]

    def reconstruct(self) -> np.ndarray:
        return self.imfs.sum(axis=0) + self.residual


def _extrema(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = np.diff(x)
    maxima = np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0)) + 1
    minima = np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0)) + 1
    return maxima, minima


def _extrema_count(x: np.ndarray) -> int:
    maxima, minima = _extrema(x)
    return maxima.size + minima.size


def _envelope(x: np.ndarray, knots: np.ndarray) -> np.ndarray:
    """Cubic spline through the extrema, mirrored about both signal ends"""
    last = x.size - 1
    head = knots[:MIRRORED_EXTREMA]
    tail = knots[-MIRRORED_EXTREMA:]
    positions = np.concatenate((-head[::-1], knots, 2 * last - tail[::-1]))
    values = np.concatenate((x[head[::-1]], x[knots], x[tail[::-1]]))
    return CubicSpline(positions, values)(np.arange(x.size))


def _sift(x: np.ndarray, max_sifts: int, sd_threshold: float) -> np.ndarray:
    h = x.copy()
    for _ in range(max_sifts):
        maxima, minima = _extrema(h)
        if maxima.size < 1 or minima.size < 1:
            break
        mean = 0.5 * (_envelope(h, maxima) + _envelope(h, minima))
        candidate = h - mean
        energy = np.sum(h ** 2)
        sd = np.sum(mean ** 2) / energy if energy > 0 else 0.0
        h = candidate
        if sd < sd_threshold:
            break
    return h


def emd(sig, max_imfs: int = 12, max_sifts: int = 10, sd_threshold: float = 0.2) -> ImfSet:
    x = np.asarray(sig, dtype=float)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise InsufficientDataError(f"emd needs at least {MIN_LENGTH} samples")

    imfs = []
    residual = x.copy()
    while len(imfs) < max_imfs and _extrema_count(residual) >= 3:
        imf = _sift(residual, max_sifts, sd_threshold)
        if not np.any(imf):
            break
        imfs.append(imf)
        residual = residual - imf

    stack = np.array(imfs) if imfs else np.empty((0, x.size))
    logger.debug("EMD of %d samples produced %d IMFs", x.size, len(imfs))
    return ImfSet(imfs=stack, residual=x - stack.sum(axis=0))


def _mu(f: np.ndarray, param: ImfParameter) -> float:
    if param is ImfParameter.TKEO:
        return float(np.mean(tkeo(f)))
    if param is ImfParameter.SEO:
        return float(np.mean(seo(f)))
    if param is ImfParameter.SHE:
        return shannon_entropy(f)
    if param is ImfParameter.RE:
        return renyi2_entropy(f)
    return zcr(f)


def _ratio(numerator: float, denominator: float) -> float:
    return float(numerator / denominator) if denominator != 0 else float("nan")


def imf_snr(imf_set: ImfSet, param: ImfParameter) -> float:
    """Σ_{i≥4} μ_i / Σ_{i≤3} μ_i"""
    param = ImfParameter(param)
    if imf_set.count < 4:
        return float("nan")
    mu = np.array([_mu(f, param) for f in imf_set.imfs])
    return _ratio(mu[3:].sum(), mu[:3].sum())


def imf_nsr(imf_set: ImfSet, param: ImfParameter) -> float:
    """Σ_{i≤2} μ̂_i / Σ_{i≥3} μ̂_i with μ̂ taken on ln(|f_i| + ε)"""
    param = ImfParameter(param)
    if param is ImfParameter.ZCR:
        raise ParameterError("IMF-NSR is not defined for the ZCR parameter")
    if imf_set.count < 3:
        return float("nan")
    mu = np.array([_mu(np.log(np.abs(f) + LOG_EPS), param) for f in imf_set.imfs])
    return _ratio(mu[:2].sum(), mu[2:].sum())


def imf_fd(imf_set: ImfSet) -> float:
    """Petrosian-form fractal dimension of the first IMF"""
    f1 = imf_set.first()
    N = f1.size
    n_ch = sign_changes(f1)
    log_n = np.log10(N)
    return float(log_n / (log_n + np.log10(N / (N + 0.4 * n_ch))))


def imf_cpp(imf_set: ImfSet, rate: float, f_max: float = 350.0) -> float:
    f1 = imf_set.first()
    return cepstral_peak_prominence(real_cepstrum(f1, rate), rate, f_max)


def gne_band_centers(rate: float) -> np.ndarray:
    top = rate / 2.0 - GNE_FIRST_CENTER_HZ
    if top < GNE_FIRST_CENTER_HZ:
        return np.empty(0)
    return np.arange(GNE_FIRST_CENTER_HZ, top + 1e-9, GNE_BAND_HZ)


def band_envelopes(x: np.ndarray, rate: float, centers: np.ndarray) -> np.ndarray:
    """Hilbert envelopes of Hann-shaped 1000 Hz bands, one per row"""
    n = x.size
    spectrum = sp_fft.rfft(x)
    freqs = sp_fft.rfftfreq(n, d=1.0 / rate)
    offsets = (freqs[None, :] - centers[:, None]) / GNE_BAND_HZ
    masks = np.where(np.abs(offsets) < 0.5, 0.5 * (1.0 + np.cos(2 * np.pi * offsets)), 0.0)
    bands = sp_fft.irfft(spectrum[None, :] * masks, n=n, axis=1)
    return np.abs(hilbert(bands, axis=1))


def max_envelope_correlation(envelopes: np.ndarray) -> float:
    """Largest normalized cross-correlation over all band pairs and lags, floored at 0"""
    centered = envelopes - envelopes.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    best: Optional[float] = None
    for i in range(len(centered)):
        for j in range(i + 1, len(centered)):
            if norms[i] == 0 or norms[j] == 0:
                continue
            peak = correlate(centered[i], centered[j], mode="full").max() / (norms[i] * norms[j])
            best = peak if best is None else max(best, peak)
    if best is None:
        return float("nan")
    return float(np.clip(best, 0.0, 1.0))


def imf_gne_frame(
    frame,
    rate: float,
    lpc_order: int = 13,
    max_imfs: int = 12,
    max_sifts: int = 10,
    sd_threshold: float = 0.2,
) -> float:
    """Glottal-to-noise excitation of one raw frame computed on its first IMF"""
    centers = gne_band_centers(rate)
    if centers.size < 2:
        return float("nan")
    x = np.asarray(frame, dtype=float)
    if not np.any(x):
        return float("nan")

    return imf_gne_from_set(emd(x, max_imfs, max_sifts, sd_threshold), rate, lpc_order)


def imf_gne_from_set(imf_set: ImfSet, rate: float, lpc_order: int = 13) -> float:
    """IMF-GNE of a frame whose decomposition is already available"""
    centers = gne_band_centers(rate)
    if centers.size < 2 or imf_set.count < 1:
        return float("nan")
    f1 = imf_set.imfs[0]
    try:
        a = lpc(f1, lpc_order)
    except (DegenerateInputError, InsufficientDataError):
        return float("nan")
    excitation = lfilter(a, [1.0], f1)
    return max_envelope_correlation(band_envelopes(excitation, rate, centers))


def imf_gne(
    sig: Signal,
    frame_len: int,
    hop: int,
    lpc_order: int = 13,
    max_imfs: int = 12,
    max_sifts: int = 10,
    sd_threshold: float = 0.2,
) -> np.ndarray:
    """Per-frame IMF-GNE sequence over rectangular frames of the signal"""
    if gne_band_centers(sig.rate).size < 2:
        raise InsufficientDataError(f"IMF-GNE needs at least two 1000 Hz bands below {sig.rate / 2} Hz")
    grid = frame_samples(sig, frame_len, hop, WindowKind.RECTANGULAR)
    return np.array([
        imf_gne_frame(f, sig.rate, lpc_order, max_imfs, max_sifts, sd_threshold) for f in grid.frames
    ])
