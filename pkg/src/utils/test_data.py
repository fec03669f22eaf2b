"""
Synthetic test data for VoxPath development and testing: sustained
vowel-like signals, tones and a small labelled corpus on disk
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.io import wavfile
from scipy.signal import lfilter

from src.schemas.models import Signal

DEFAULT_FORMANTS: Tuple[Tuple[float, float], ...] = ((700.0, 80.0), (1200.0, 90.0), (2600.0, 120.0))


def _time(duration: float, rate: float) -> np.ndarray:
    return np.arange(int(round(duration * rate))) / rate


def sine(freq: float, duration: float = 1.0, rate: float = 16000.0, phase: float = 0.0) -> Signal:
    return Signal(samples=np.sin(2 * np.pi * freq * _time(duration, rate) + phase), rate=rate)


def two_tone(f1: float, f2: float, duration: float = 1.0, rate: float = 16000.0) -> Signal:
    t = _time(duration, rate)
    return Signal(samples=np.sin(2 * np.pi * f1 * t) + np.sin(2 * np.pi * f2 * t), rate=rate)


def am_tone(carrier: float, mod_freq: float, depth: float = 0.5, duration: float = 2.0,
            rate: float = 16000.0) -> Signal:
    t = _time(duration, rate)
    envelope = 1.0 + depth * np.sin(2 * np.pi * mod_freq * t)
    return Signal(samples=envelope * np.sin(2 * np.pi * carrier * t), rate=rate)


def pulse_positions(f0: float, count: int, rate: float, jitter: float = 0.0,
                    rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Glottal pulse sample indices with relative period jitter"""
    rng = rng or np.random.default_rng(0)
    period = rate / f0
    periods = period * (1.0 + jitter * rng.standard_normal(int(count / period) + 2))
    positions = np.cumsum(np.maximum(periods, 1.0)) - periods[0]
    return positions[positions < count].astype(int)


def pulse_train(f0: float = 120.0, duration: float = 1.0, rate: float = 16000.0, jitter: float = 0.0,
                seed: int = 0) -> Signal:
    count = int(round(duration * rate))
    x = np.zeros(count)
    x[pulse_positions(f0, count, rate, jitter, np.random.default_rng(seed))] = 1.0
    return Signal(samples=x, rate=rate)


def formant_filter(x: np.ndarray, rate: float,
                   formants: Sequence[Tuple[float, float]] = DEFAULT_FORMANTS) -> np.ndarray:
    """Cascade of two-pole resonators at (frequency, bandwidth) pairs"""
    y = np.asarray(x, dtype=float)
    for freq, bandwidth in formants:
        r = np.exp(-np.pi * bandwidth / rate)
        theta = 2 * np.pi * freq / rate
        a = [1.0, -2 * r * np.cos(theta), r ** 2]
        y = lfilter([1.0 - r], a, y)
    return y


def add_noise(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    rms = np.sqrt(np.mean(x ** 2))
    return x + rng.standard_normal(x.size) * rms / 10 ** (snr_db / 20.0)


def synthetic_vowel(
    duration: float = 1.0,
    rate: float = 16000.0,
    f0: float = 120.0,
    formants: Sequence[Tuple[float, float]] = DEFAULT_FORMANTS,
    snr_db: Optional[float] = None,
    am_freq: Optional[float] = None,
    am_depth: float = 0.0,
    jitter: float = 0.0,
    seed: int = 0,
) -> Signal:
    """Sustained vowel: jittered pulse train through formant resonators,
    optional amplitude modulation and additive white noise, unit peak"""
    rng = np.random.default_rng(seed)
    count = int(round(duration * rate))
    source = np.zeros(count)
    source[pulse_positions(f0, count, rate, jitter, rng)] = 1.0
    y = formant_filter(source, rate, formants)
    if am_freq:
        y = y * (1.0 + am_depth * np.sin(2 * np.pi * am_freq * np.arange(count) / rate))
    if snr_db is not None:
        y = add_noise(y, snr_db, rng)
    return Signal(samples=y / np.max(np.abs(y)), rate=rate)


def healthy_voice(seed: int, f0: float = 120.0, duration: float = 1.0, rate: float = 16000.0) -> Signal:
    return synthetic_vowel(duration, rate, f0, snr_db=20.0, seed=seed)


def pathological_voice(seed: int, f0: float = 120.0, duration: float = 1.0, rate: float = 16000.0) -> Signal:
    rng = np.random.default_rng(seed + 10_000)
    return synthetic_vowel(
        duration, rate, f0,
        snr_db=5.0,
        am_freq=float(rng.uniform(3.0, 8.0)),
        am_depth=0.3,
        jitter=0.02,
        seed=seed,
    )


def write_wav(path: Union[str, Path], sig: Signal) -> Path:
    """16-bit PCM WAV of a signal scaled to 90% of full range"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    peak = np.max(np.abs(sig.samples)) or 1.0
    pcm = np.round(sig.samples / peak * 0.9 * 32767).astype(np.int16)
    wavfile.write(path, int(sig.rate), pcm)
    return path


def build_corpus(directory: Union[str, Path], per_class: int = 10, duration: float = 1.0,
                 rate: float = 16000.0, seed: int = 0) -> Path:
    """Write healthy and pathological WAVs plus manifest.csv; returns the manifest path"""
    directory = Path(directory)
    rows = []
    for label, make in (("healthy", healthy_voice), ("pathological", pathological_voice)):
        for i in range(per_class):
            gender = "M" if i % 2 == 0 else "F"
            f0 = 120.0 if gender == "M" else 210.0
            name = f"{label}_{i:03d}.wav"
            write_wav(directory / name, make(seed + i, f0, duration, rate))
            rows.append({"path": name, "label": label, "speaker": f"{label[0]}{i:03d}", "gender": gender})
    manifest = directory / "manifest.csv"
    pd.DataFrame(rows, columns=["path", "label", "speaker", "gender"]).to_csv(manifest, index=False)
    return manifest
