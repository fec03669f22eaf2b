import numpy as np
import pytest

from src.audio.wav_io import frame
from src.features.modspec import (
    ModulationSpectrum,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    modulation_features,
    modulation_spectrum,
)
from src.schemas.models import FrameGrid, Signal, WindowKind
from src.utils.exceptions import InsufficientDataError
from src.utils.test_data import am_tone, synthetic_vowel


def _features(sig, P=20):
    grid = frame(sig, 25, 10, WindowKind.HAMMING)
    ms = modulation_spectrum(grid, mel_filterbank(P, grid.frame_len, sig.rate))
    return ms, modulation_features(ms)


def test_mel_filterbank_geometry():
    fb = mel_filterbank(2, 512, 16000)
    np.testing.assert_allclose(fb.triangles.max(axis=1), 1.0)
    assert np.all(fb.triangles.sum(axis=0) <= 2.0 + 1e-12)
    expected = 700 * (10 ** (np.linspace(0, hz_to_mel(8000), 4)[1:-1] / 2595) - 1)
    np.testing.assert_allclose(fb.centers, expected)


def test_mel_scale_inverse():
    f = np.array([0.0, 100.0, 1000.0, 8000.0])
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, atol=1e-9)


def test_modulation_rows_sum_to_one(vowel):
    ms, _ = _features(vowel)
    np.testing.assert_allclose(ms.psi_n.sum(axis=1), 1.0)
    assert ms.psi.sum() == pytest.approx(20.0)


def test_modulation_frequency_peak_of_am_tone():
    sig = am_tone(carrier=200.0, mod_freq=3.0, depth=0.5, duration=2.0)
    ms, feats = _features(sig)
    assert abs(feats.mfp - 3.0) <= ms.mod_axis


def test_leakage_only_bands_are_flat():
    sig = am_tone(carrier=200.0, mod_freq=3.0, depth=0.5, duration=2.0)
    ms, _ = _features(sig)
    M = ms.psi.size
    np.testing.assert_allclose(ms.psi_n[4:], 1.0 / M)
    assert not np.allclose(ms.psi_n[1], 1.0 / M)


def test_modulation_spectrum_ignores_recording_gain():
    sig = am_tone(carrier=200.0, mod_freq=3.0, depth=0.5, duration=2.0)
    quiet = Signal(samples=1e-3 * sig.samples, rate=sig.rate)
    loud, _ = _features(sig)
    soft, feats = _features(quiet)
    np.testing.assert_allclose(soft.psi, loud.psi, atol=1e-9)
    assert abs(feats.mfp - 3.0) <= soft.mod_axis


def test_slow_modulation_raises_energy_ratio():
    _, slow = _features(am_tone(carrier=200.0, mod_freq=3.0, depth=0.5, duration=2.0))
    _, fast = _features(am_tone(carrier=200.0, mod_freq=12.0, depth=0.5, duration=2.0))
    assert slow.mser > fast.mser


def test_flat_modulation_spectrum_has_zero_peak_height():
    ms = ModulationSpectrum(psi_n=np.full((2, 16), 1 / 16), psi=np.full(16, 2 / 16), mod_axis=1.0)
    assert modulation_features(ms).rphm == pytest.approx(0.0, abs=1e-12)


def test_circular_frame_shift_is_invariant(vowel):
    grid = frame(vowel, 25, 10, WindowKind.HAMMING)
    fb = mel_filterbank(20, grid.frame_len, vowel.rate)
    shifted = FrameGrid(
        frame_len=grid.frame_len,
        hop=grid.hop,
        window=grid.window,
        rate=grid.rate,
        frames=np.roll(grid.frames, 5, axis=0),
    )
    np.testing.assert_allclose(
        modulation_spectrum(shifted, fb).psi, modulation_spectrum(grid, fb).psi, atol=1e-9
    )


def test_too_few_modulation_bins():
    sig = Signal(samples=np.random.default_rng(0).standard_normal(1500), rate=16000)
    grid = frame(sig, 25, 10, WindowKind.HAMMING)
    ms = modulation_spectrum(grid, mel_filterbank(20, grid.frame_len, sig.rate))
    with pytest.raises(InsufficientDataError):
        modulation_features(ms)


def test_modulated_vowel_peaks_at_modulation_rate():
    sig = synthetic_vowel(duration=2.0, f0=120.0, am_freq=3.0, am_depth=0.5)
    ms, feats = _features(sig)
    assert abs(feats.mfp - 3.0) <= ms.mod_axis
