"""
Higher-order spectra: circular triple correlation, bispectrum, bicepstrum
and the bicepstral features
"""

from typing import Iterable, List, NamedTuple, Optional

import numpy as np
from pydantic import Field, field_validator
from scipy import fft as sp_fft

from src.schemas.models import ArraySchema
from src.spectral.core import (
    LOG_EPS,
    complex_cepstrum_values,
    quefrency_start,
    real_cepstrum_values,
)
from src.utils.exceptions import InsufficientDataError, ParameterError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

MIN_FRAME_LEN = 4
MAX_FRAME_LEN = 1024


class Bispectrum(ArraySchema):
    """B[k1, k2] as the 2-D DFT of the circular triple correlation"""
    values: np.ndarray = Field(..., description="N x N complex bispectrum")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v):
        values = np.array(v, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("a bispectrum is a square matrix")
        values.setflags(write=False)
        return values


class Bicepstrum(ArraySchema):
    """Real bicepstrum c[n1, n2] and its complex variant c~[n1, n2]"""
    real_part: np.ndarray = Field(..., description="Inverse 2-D DFT of ln|B|")
    complex_variant: np.ndarray = Field(..., description="Inverse 2-D DFT of ln B (unwrapped phase)")


class OneDimIndices(ArraySchema):
    """Diagonals ρ[n] = c[n, n] and ϑ[k] = |B[k, k]|"""
    rho: np.ndarray = Field(..., description="One-dimensional bicepstral index")
    vartheta: np.ndarray = Field(..., description="One-dimensional bispectral index")


class FrameBispectra(NamedTuple):
    """Every per-frame quantity the bicepstral features consume"""
    bispectrum: np.ndarray
    bicepstrum: np.ndarray
    complex_bicepstrum: np.ndarray
    cepstrum: np.ndarray
    complex_cepstrum: np.ndarray
    magnitude_spectrum: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return np.diagonal(self.bicepstrum)

    @property
    def rho_tilde(self) -> np.ndarray:
        return np.diagonal(self.complex_bicepstrum)

    @property
    def vartheta(self) -> np.ndarray:
        return np.abs(np.diagonal(self.bispectrum))


class BicepstralFeatures(NamedTuple):
    bcii: float
    hfebc: float
    lfebc: float
    lcbcer: float
    hcbcer: float
    lsber: float
    hsber: float


class BicepstralDistances(NamedTuple):
    bcmd: np.ndarray
    bcpd: np.ndarray
    bmd: np.ndarray
    bpd: np.ndarray


class BicepstrumInterference(NamedTuple):
    bcmii: float
    bcpii: float


def _check_frame(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not MIN_FRAME_LEN <= x.size <= MAX_FRAME_LEN:
        raise ParameterError(
            f"bispectral frames must hold {MIN_FRAME_LEN}..{MAX_FRAME_LEN} samples"
        )
    return x


def triple_correlation(x) -> np.ndarray:
    """γ[n1, n2] = (1/N) Σ_n x[n] x[(n+n1) mod N] x[(n+n2) mod N]"""
    x = _check_frame(x)
    N = x.size
    shifted = x[(np.arange(N)[:, None] + np.arange(N)[None, :]) % N]
    return (shifted * x[:, None]).T @ shifted / N


def _bispectrum_values(x) -> np.ndarray:
    return sp_fft.fft2(triple_correlation(x))


def unwrap_2d(phase: np.ndarray) -> np.ndarray:
    """Row-then-column π-jump unwrapping"""
    return np.unwrap(np.unwrap(phase, axis=1), axis=0)


def _bicepstra(B: np.ndarray):
    log_magnitude = np.log(np.abs(B) + LOG_EPS)
    real_part = sp_fft.ifft2(log_magnitude).real
    complex_variant = sp_fft.ifft2(log_magnitude + 1j * unwrap_2d(np.angle(B)))
    return real_part, complex_variant


def bispectrum(x) -> Bispectrum:
    return Bispectrum(values=_bispectrum_values(x))


def bicepstrum(x) -> Bicepstrum:
    real_part, complex_variant = _bicepstra(_bispectrum_values(x))
    return Bicepstrum(real_part=real_part, complex_variant=complex_variant)


def one_dim_indices(x) -> OneDimIndices:
    B = _bispectrum_values(x)
    real_part, _ = _bicepstra(B)
    return OneDimIndices(rho=np.diagonal(real_part).copy(), vartheta=np.abs(np.diagonal(B)))


def analyze_frame(x) -> FrameBispectra:
    x = _check_frame(x)
    B = _bispectrum_values(x)
    real_part, complex_variant = _bicepstra(B)
    return FrameBispectra(
        bispectrum=B,
        bicepstrum=real_part,
        complex_bicepstrum=complex_variant,
        cepstrum=real_cepstrum_values(x),
        complex_cepstrum=complex_cepstrum_values(x),
        magnitude_spectrum=np.abs(sp_fft.fft(x)),
    )


def cap_frames(frames, max_len: int) -> np.ndarray:
    """Truncate frames to the bispectral analysis length cap"""
    frames = np.atleast_2d(np.asarray(frames, dtype=float))
    if frames.shape[1] > max_len:
        logger.debug("Truncating %d-sample frames to %d for bispectral analysis", frames.shape[1], max_len)
        frames = frames[:, :max_len]
    return frames


def _ratio(numerator: float, denominator: float) -> float:
    return float(numerator / denominator) if denominator != 0 else float("nan")


def interference_index(eta, N: int) -> float:
    """(1/(N²-1)) (1/max η) Σ_m |η[m+1] - η[m]|"""
    eta = np.asarray(eta, dtype=float)
    peak = eta.max()
    if peak == 0:
        return float("nan")
    return float(np.sum(np.abs(np.diff(eta))) / ((N ** 2 - 1) * peak))


class BispectralAccumulator:
    """Single pass over frames collecting everything the bicepstral features need.

    Only the running sums and the previous frame are kept, so memory stays
    at a few N x N arrays regardless of the number of frames.
    """

    def __init__(self, rate: float, f_max: float) -> None:
        self.rate = rate
        self.f_max = f_max
        self.frame_count = 0
        self.N: Optional[int] = None
        self._sum_c: Optional[np.ndarray] = None
        self._sum_abs_c: Optional[np.ndarray] = None
        self._sum_rho: Optional[np.ndarray] = None
        self._sum_cepstrum: Optional[np.ndarray] = None
        self._sum_spectrum: Optional[np.ndarray] = None
        self._sum_vartheta: Optional[np.ndarray] = None
        self._previous: Optional[FrameBispectra] = None
        self.distances: List[List[float]] = [[], [], [], []]
        self.eta_modulus: List[float] = []
        self.eta_phase: List[float] = []

    def add(self, x) -> None:
        current = analyze_frame(x)
        if self.N is None:
            self.N = current.bispectrum.shape[0]
            self._sum_c = np.zeros((self.N, self.N))
            self._sum_abs_c = np.zeros((self.N, self.N))
            self._sum_rho = np.zeros(self.N)
            self._sum_cepstrum = np.zeros(self.N)
            self._sum_spectrum = np.zeros(self.N)
            self._sum_vartheta = np.zeros(self.N)
        elif current.bispectrum.shape[0] != self.N:
            raise ParameterError("all frames must have the same length")

        self._sum_c += current.bicepstrum
        self._sum_abs_c += np.abs(current.bicepstrum)
        self._sum_rho += current.rho
        self._sum_cepstrum += current.cepstrum
        self._sum_spectrum += current.magnitude_spectrum
        self._sum_vartheta += current.vartheta

        self.eta_modulus.append(float(np.sum((np.abs(current.cepstrum) - np.abs(current.rho)) ** 2)))
        self.eta_phase.append(
            float(np.sum((np.angle(current.complex_cepstrum) - np.angle(current.rho_tilde)) ** 2))
        )

        if self._previous is not None:
            previous = self._previous
            self.distances[0].append(float(np.sum(np.abs(
                np.abs(current.complex_bicepstrum) - np.abs(previous.complex_bicepstrum)))))
            self.distances[1].append(float(np.sum(np.abs(
                np.angle(current.complex_bicepstrum) - np.angle(previous.complex_bicepstrum)))))
            self.distances[2].append(float(np.sum(np.abs(
                np.abs(current.bispectrum) - np.abs(previous.bispectrum)))))
            self.distances[3].append(float(np.sum(np.abs(
                np.angle(current.bispectrum) - np.angle(previous.bispectrum)))))

        self._previous = current
        self.frame_count += 1

    def add_all(self, frames: Iterable) -> "BispectralAccumulator":
        for x in frames:
            self.add(x)
        return self

    def _require(self, minimum: int) -> int:
        if self.frame_count < minimum or self.N is None:
            raise InsufficientDataError(f"needs at least {minimum} frame(s), got {self.frame_count}")
        return self.N

    def features(self) -> BicepstralFeatures:
        N = self._require(1)
        M = self.frame_count

        # 0/0 where every frame's bicepstrum vanishes: treat as fully coherent
        b = np.divide(np.abs(self._sum_c), self._sum_abs_c,
                      out=np.ones_like(self._sum_c), where=self._sum_abs_c > 0)
        peak = np.abs(b).max()
        bcii = _ratio(np.sum(np.abs(np.diff(b, axis=1))), (N ** 2 - 1) * peak)

        rho = np.abs(self._sum_rho / M)
        cepstrum = np.abs(self._sum_cepstrum / M)
        spectrum = self._sum_spectrum / M
        vartheta = self._sum_vartheta / M

        L = quefrency_start(self.rate, self.f_max)
        total_rho = rho.sum()
        lfebc = _ratio(rho[:L + 1].sum(), total_rho)
        hfebc = _ratio(rho[L + 1:].sum(), total_rho)
        lcbcer = _ratio(cepstrum[:L + 1].sum(), rho[:L + 1].sum())
        hcbcer = _ratio(cepstrum[L + 1:].sum(), rho[L + 1:].sum())

        K = N // 2
        lsber = _ratio(spectrum[:K + 1].sum(), vartheta[:K + 1].sum())
        hsber = _ratio(spectrum[K + 1:].sum(), vartheta[K + 1:].sum())
        return BicepstralFeatures(bcii, hfebc, lfebc, lcbcer, hcbcer, lsber, hsber)

    def distance_sequences(self) -> BicepstralDistances:
        self._require(2)
        return BicepstralDistances(*(np.asarray(d) for d in self.distances))

    def interference(self) -> BicepstrumInterference:
        N = self._require(2)
        return BicepstrumInterference(
            bcmii=interference_index(self.eta_modulus, N),
            bcpii=interference_index(self.eta_phase, N),
        )


def _accumulate(frames, rate: float, f_max: float) -> BispectralAccumulator:
    return BispectralAccumulator(rate, f_max).add_all(np.atleast_2d(frames))


def bicepstral_features(frames, rate: float, f_max: float = 350.0) -> BicepstralFeatures:
    return _accumulate(frames, rate, f_max).features()


def bicepstral_distances(frames, rate: float = 16000.0, f_max: float = 350.0) -> BicepstralDistances:
    return _accumulate(frames, rate, f_max).distance_sequences()


def bicepstrum_interference(frames, rate: float = 16000.0, f_max: float = 350.0) -> BicepstrumInterference:
    return _accumulate(frames, rate, f_max).interference()


