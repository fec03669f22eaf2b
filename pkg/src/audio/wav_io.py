"""
WAV ingestion, resampling and framing
"""

import struct
from fractions import Fraction
from typing import Optional, Union
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft
from scipy.io import wavfile
from scipy.signal import firwin, resample_poly
from scipy.signal import windows as sp_windows

from src.schemas.models import FrameGrid, Signal, WindowKind
from src.utils.exceptions import (
    AudioFormatError,
    InsufficientDataError,
    ParameterError,
    UnsupportedAudioError,
)
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

KAISER_BETA = 8.0
TAPS_PER_PHASE = 32


def _scale_to_unit(data: np.ndarray) -> np.ndarray:
    """Map integer PCM codes to [-1, 1]; float data passes through"""
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 2.0 ** 15
    if data.dtype == np.int32:
        # 24-bit PCM is delivered left-justified in int32 by scipy
        return data.astype(np.float64) / 2.0 ** 31
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(np.float64)
    raise UnsupportedAudioError(f"Unsupported sample type: {data.dtype}")


def read_wav(path: Union[str, Path]) -> Signal:
    """Read a PCM/IEEE-float WAV file as a mono signal scaled to [-1, 1]"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Recording not found: {path}")

    try:
        rate, data = wavfile.read(str(path))
    except ValueError as e:
        message = str(e)
        if "Unknown wave file format" in message or "Unsupported" in message:
            raise UnsupportedAudioError(f"{path}: {message}") from e
        raise AudioFormatError(f"{path}: {message}") from e
    except (EOFError, struct.error, IndexError, OSError) as e:
        raise AudioFormatError(f"{path}: truncated or malformed WAV ({e})") from e

    samples = _scale_to_unit(np.asarray(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)

    if samples.size == 0:
        raise AudioFormatError(f"{path}: no audio frames")

    logger.debug("Read %s: %d samples at %d Hz", path, samples.size, rate)
    return Signal(samples=samples, rate=float(rate))


def resample(sig: Signal, target_rate: float) -> Signal:
    """Polyphase windowed-sinc resampling (Kaiser window)"""
    if target_rate <= 0:
        raise ParameterError("target_rate must be positive")
    if np.isclose(sig.rate, target_rate):
        return sig

    ratio = Fraction(target_rate).limit_denominator(10 ** 6) / Fraction(sig.rate).limit_denominator(10 ** 6)
    up, down = ratio.numerator, ratio.denominator
    max_rate = max(up, down)

    taps = firwin(2 * (TAPS_PER_PHASE // 2) * max_rate + 1, 1.0 / max_rate, window=("kaiser", KAISER_BETA))
    samples = resample_poly(sig.samples, up, down, window=taps)
    return Signal(samples=samples, rate=float(target_rate))


def load_recording(path: Union[str, Path], target_rate: float) -> Signal:
    """read_wav followed by resampling to the pipeline rate"""
    return resample(read_wav(path), target_rate)


def _window(kind: WindowKind, length: int) -> np.ndarray:
    if kind == WindowKind.RECTANGULAR:
        return np.ones(length)
    return sp_windows.hamming(length, sym=True)


def frame_samples(
    sig: Signal,
    frame_len: int,
    hop: int,
    window: Union[WindowKind, str] = WindowKind.HAMMING,
) -> FrameGrid:
    """Segment a signal into windowed frames given sizes in samples"""
    window = WindowKind(window)
    if frame_len < 1 or hop < 1:
        raise ParameterError("frame_len and hop must be positive")
    if hop > frame_len:
        raise ParameterError("hop must not exceed frame_len")
    if len(sig) < frame_len:
        raise InsufficientDataError(
            f"Signal of {len(sig)} samples is shorter than one frame ({frame_len})"
        )

    segments = sliding_window_view(sig.samples, frame_len)[::hop]
    frames = segments * _window(window, frame_len)
    return FrameGrid(frame_len=frame_len, hop=hop, window=window, rate=sig.rate, frames=frames)


def frame(
    sig: Signal,
    frame_ms: float,
    hop_ms: float,
    window: Union[WindowKind, str] = WindowKind.HAMMING,
) -> FrameGrid:
    """Segment a signal into windowed frames given sizes in milliseconds"""
    frame_len = int(round(frame_ms * sig.rate / 1000.0))
    hop = int(round(hop_ms * sig.rate / 1000.0))
    return frame_samples(sig, frame_len, hop, window)


def stft(grid: FrameGrid, n_fft: Optional[int] = None) -> np.ndarray:
    """One-sided DFT of every frame, shape M x (n_fft // 2 + 1)"""
    n_fft = n_fft or grid.frame_len
    return sp_fft.rfft(grid.frames, n=n_fft, axis=1)
