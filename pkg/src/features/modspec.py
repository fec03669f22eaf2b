"""
Modulation spectrogram and the modulation features MSER, MFP and RPHM
"""

from typing import NamedTuple

import numpy as np
from pydantic import Field, model_validator
from scipy import fft as sp_fft

from src.audio.wav_io import stft
from src.schemas.models import ArraySchema, FrameGrid
from src.spectral.core import LOG_EPS, fit_line, relative_peak_height
from src.utils.exceptions import InsufficientDataError, ParameterError

MODULATION_SPLIT_HZ = 5.0
ENERGY_FLOOR_DB = 60.0


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_points(count: int, rate: float) -> np.ndarray:
    """count + 2 mel-equidistant frequencies from 0 to rate/2 (edges included)"""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(rate / 2.0), count + 2))


class MelFilterbank(ArraySchema):
    """Triangular filters equidistant on the mel scale"""
    triangles: np.ndarray = Field(..., description="P x (n_fft/2 + 1) weights")
    centers: np.ndarray = Field(..., description="Center frequencies in Hz")
    rate: float = Field(..., gt=0, description="Sampling rate in Hz")
    n_fft: int = Field(..., gt=0, description="Transform size")

    @property
    def count(self) -> int:
        return int(self.triangles.shape[0])


class ModulationSpectrum(ArraySchema):
    """Normalized modulation spectrum Ψ_n[p, l] and its band sum ψ[l]"""
    psi_n: np.ndarray = Field(..., description="P x M normalized modulation spectrum")
    psi: np.ndarray = Field(..., description="Band sum of psi_n over p")
    mod_axis: float = Field(..., gt=0, description="Modulation frequency per bin in Hz")

    @model_validator(mode="after")
    def validate_sums(self) -> "ModulationSpectrum":
        if self.psi_n.ndim != 2 or self.psi.shape != (self.psi_n.shape[1],):
            raise ValueError("psi must have one entry per modulation bin")
        if not np.allclose(self.psi_n.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("each row of psi_n must sum to 1")
        return self

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.psi.size) * self.mod_axis


class ModulationFeatures(NamedTuple):
    mser: float
    mfp: float
    rphm: float


def mel_filterbank(P: int, n_fft: int, rate: float) -> MelFilterbank:
    """P triangles over [0, rate/2]; triangle p spans mel neighbours p-1..p+1"""
    if P < 2:
        raise ParameterError("a mel filterbank needs at least two filters")

    edges = mel_points(P, rate)
    bins = np.arange(n_fft // 2 + 1) * rate / n_fft
    lower, centers, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]

    rising = (bins - lower) / (centers - lower)
    falling = (upper - bins) / (upper - centers)
    triangles = np.clip(np.minimum(rising, falling), 0.0, None)

    # peaks rarely fall on a bin; rescale so every triangle peaks at 1
    peaks = triangles.max(axis=1, keepdims=True)
    triangles = np.divide(triangles, peaks, out=np.zeros_like(triangles), where=peaks > 0)
    return MelFilterbank(triangles=triangles, centers=edges[1:-1], rate=rate, n_fft=n_fft)


def subband_energies(grid: FrameGrid, weights: np.ndarray, n_fft: int) -> np.ndarray:
    """P x M matrix of filterbank-weighted per-frame power spectra"""
    power = np.abs(stft(grid, n_fft=n_fft)) ** 2
    return weights @ power.T


def modulation_spectrum(grid: FrameGrid, fb: MelFilterbank) -> ModulationSpectrum:
    if grid.count < 4:
        raise InsufficientDataError("modulation spectrum needs at least four frames")
    if fb.n_fft != grid.frame_len:
        raise ParameterError("filterbank size must match the frame length")

    X = subband_energies(grid, fb.triangles, fb.n_fft)
    # bands holding only window leakage sit at the floor and carry no modulation
    floor = max(float(X.max()) * 10.0 ** (-ENERGY_FLOOR_DB / 10.0), LOG_EPS)
    empty = np.all(X <= floor, axis=1)
    log_X = np.log(np.maximum(X, floor))
    X_hat = log_X - log_X.mean(axis=1, keepdims=True)
    X_hat[empty] = 0.0

    power = np.abs(sp_fft.fft(X_hat, axis=1)) ** 2
    totals = power.sum(axis=1, keepdims=True)
    # a flat subband has no modulation; spread it uniformly so the row still sums to 1
    psi_n = np.where(totals > 0, power / np.where(totals > 0, totals, 1.0), 1.0 / power.shape[1])

    return ModulationSpectrum(psi_n=psi_n, psi=psi_n.sum(axis=0), mod_axis=grid.frame_rate / grid.count)


def split_bin(mod_axis: float) -> int:
    """Modulation bin corresponding to 5 Hz"""
    return int(round(MODULATION_SPLIT_HZ / mod_axis))


def modulation_features(ms: ModulationSpectrum) -> ModulationFeatures:
    psi = ms.psi
    M = psi.size
    if M < 8:
        raise InsufficientDataError("modulation features need at least eight modulation bins")
    l5 = split_bin(ms.mod_axis)
    if l5 > M - 2:
        raise InsufficientDataError("modulation axis does not extend past 5 Hz")

    high = psi[l5 + 1:].sum()
    mser = float(psi[:l5 + 1].sum() / high) if high > 0 else float("nan")

    # l = 0 carries no modulation after mean subtraction; upper half mirrors the lower one
    i = 1 + int(np.argmax(psi[1:M // 2 + 1]))
    mfp = i * ms.mod_axis

    line = fit_line(psi, l5, M - 1)
    rphm = relative_peak_height(psi, i, line)
    return ModulationFeatures(mser=mser, mfp=float(mfp), rphm=float(rphm))
