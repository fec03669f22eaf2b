"""
Inferior colliculus model: gammatone and resonance filterbanks, ICER and RPHIC
"""

from typing import NamedTuple

import numpy as np
from pydantic import Field, model_validator
from scipy import fft as sp_fft
from scipy.signal import lfilter

from src.features.modspec import mel_points, subband_energies
from src.schemas.models import ArraySchema, FrameGrid
from src.spectral.core import LOG_EPS, fit_line, relative_peak_height
from src.utils.exceptions import InsufficientDataError, ParameterError

GAMMATONE_ORDER = 4
ICC_BANDS = 20
LOW_BANDS = 12
RESONANCE_COUNT = 13
RESONANCE_LOW_HZ = 12.0
RESONANCE_HIGH_HZ = 107.0
POLE_RADIUS = 0.9


def erb_bandwidth(fc):
    return 24.7 * (4.37e-3 * np.asarray(fc, dtype=float) + 1.0)


class GammatoneBank(ArraySchema):
    """Truncated, L2-normalized gammatone impulse responses"""
    responses: np.ndarray = Field(..., description="P x len impulse responses")
    centers: np.ndarray = Field(..., description="Center frequencies in Hz")
    rate: float = Field(..., gt=0, description="Sampling rate in Hz")
    order: int = Field(default=GAMMATONE_ORDER, description="Filter order")

    @property
    def count(self) -> int:
        return int(self.responses.shape[0])

    def power_weights(self, n_fft: int) -> np.ndarray:
        """Squared magnitude responses on the one-sided DFT grid"""
        return np.abs(sp_fft.rfft(self.responses, n=n_fft, axis=1)) ** 2


class ResonanceBank(ArraySchema):
    """Second-order resonators H(z) = (0.1z² - 0.09) / (z² - 1.8cos(θ)z + 0.81)"""
    centers: np.ndarray = Field(..., description="Resonance frequencies in Hz")
    rate: float = Field(..., gt=0, description="Sampling rate of the filtered axis")
    b: np.ndarray = Field(..., description="Numerator coefficients, one row per filter")
    a: np.ndarray = Field(..., description="Denominator coefficients, one row per filter")

    def filter(self, x: np.ndarray) -> np.ndarray:
        """Q x len outputs for a 1-D input"""
        return np.stack([lfilter(b, a, x) for b, a in zip(self.b, self.a)])


class IccMatrix(ArraySchema):
    """Inferior colliculus coefficients Ξ[p, q] and ξ[p] = Σ_q ln Ξ[p, q]"""
    xi_matrix: np.ndarray = Field(..., description="P x Q coefficients")
    xi: np.ndarray = Field(..., description="Per-band log-sum")

    @model_validator(mode="after")
    def validate_shape(self) -> "IccMatrix":
        if self.xi_matrix.shape[1] != RESONANCE_COUNT:
            raise ValueError(f"ICC matrices have {RESONANCE_COUNT} columns")
        if self.xi.shape != (self.xi_matrix.shape[0],):
            raise ValueError("xi must have one entry per band")
        return self


class IccFeatures(NamedTuple):
    icc: IccMatrix
    icer: float
    rphic: float


def gammatone_bank(P: int, rate: float, length: int) -> GammatoneBank:
    if length < 1:
        raise ParameterError("impulse response length must be positive")
    centers = mel_points(P, rate)[1:-1]
    t = np.arange(length) / rate
    fc = centers[:, None]
    responses = (
        t ** (GAMMATONE_ORDER - 1)
        * np.cos(2 * np.pi * fc * t)
        * np.exp(-2 * np.pi * erb_bandwidth(fc) * t)
    )
    norms = np.linalg.norm(responses, axis=1, keepdims=True)
    responses = np.divide(responses, norms, out=np.zeros_like(responses), where=norms > 0)
    return GammatoneBank(responses=responses, centers=centers, rate=rate)


def resonance_centers(Q: int = RESONANCE_COUNT) -> np.ndarray:
    q = np.arange(Q)
    return RESONANCE_LOW_HZ * (RESONANCE_HIGH_HZ / RESONANCE_LOW_HZ) ** (q / (Q - 1))


def resonance_bank(Q: int = RESONANCE_COUNT, rate: float = 100.0) -> ResonanceBank:
    if rate <= 0:
        raise ParameterError("rate must be positive")
    centers = resonance_centers(Q)
    theta = 2 * np.pi * centers / rate
    b = np.tile([0.1, 0.0, -0.09], (Q, 1))
    a = np.stack([np.ones(Q), -2 * POLE_RADIUS * np.cos(theta), np.full(Q, POLE_RADIUS ** 2)], axis=1)
    return ResonanceBank(centers=centers, rate=rate, b=b, a=a)


def icc_ratios(xi: np.ndarray):
    """ICER and RPHIC from ξ[p]"""
    xi = np.asarray(xi, dtype=float)
    high = xi[LOW_BANDS:ICC_BANDS].sum()
    icer = float(xi[:LOW_BANDS].sum() / high) if high != 0 else float("nan")
    i = int(np.argmax(xi))
    line = fit_line(xi, LOW_BANDS, ICC_BANDS - 1)
    return icer, relative_peak_height(xi, i, line)


def icc_features(grid: FrameGrid, gb: GammatoneBank) -> IccFeatures:
    if gb.count != ICC_BANDS:
        raise ParameterError(f"ICC features are defined for {ICC_BANDS} bands")
    if grid.count < 2:
        raise InsufficientDataError("ICC features need at least two frames")

    X = subband_energies(grid, gb.power_weights(grid.frame_len), grid.frame_len)
    T = np.abs(sp_fft.fft(X, axis=1))

    # the resonators run along the modulation axis, sampled at the frame rate
    resonators = resonance_bank(RESONANCE_COUNT, grid.frame_rate)
    xi_matrix = np.stack([np.mean(resonators.filter(row) ** 2, axis=1) for row in T])
    xi = np.log(xi_matrix + LOG_EPS).sum(axis=1)

    icer, rphic = icc_ratios(xi)
    return IccFeatures(icc=IccMatrix(xi_matrix=xi_matrix, xi=xi), icer=icer, rphic=rphic)
