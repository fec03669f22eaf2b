import numpy as np
import pytest
from scipy.signal import freqz, lfilter

from src.audio.wav_io import frame
from src.features.colliculus import (
    POLE_RADIUS,
    erb_bandwidth,
    gammatone_bank,
    icc_features,
    icc_ratios,
    resonance_bank,
    resonance_centers,
)
from src.schemas.models import Signal, WindowKind
from src.utils.exceptions import ParameterError


def _icc(sig):
    grid = frame(sig, 25, 10, WindowKind.HAMMING)
    return icc_features(grid, gammatone_bank(20, sig.rate, grid.frame_len))


def test_erb_bandwidth_at_1khz():
    assert erb_bandwidth(1000.0) == pytest.approx(132.639)


def test_gammatone_responses():
    gb = gammatone_bank(20, 16000, 400)
    assert gb.responses.shape == (20, 400)
    np.testing.assert_allclose(gb.responses[:, 0], 0.0)
    np.testing.assert_allclose(np.linalg.norm(gb.responses, axis=1), 1.0)
    assert np.all(np.diff(gb.centers) > 0)


def test_resonance_centers_span_12_to_107_hz():
    centers = resonance_centers()
    assert centers.size == 13
    assert centers[0] == pytest.approx(12.0)
    assert centers[-1] == pytest.approx(107.0)


def test_resonators_poles_and_dc_gain():
    bank = resonance_bank(13, 1000.0)
    theta = 2 * np.pi * bank.centers / 1000.0
    for b, a, th in zip(bank.b, bank.a, theta):
        np.testing.assert_allclose(np.abs(np.roots(a)), POLE_RADIUS)
        _, h = freqz(b, a, worN=[0.0])
        assert h[0].real == pytest.approx(0.01 / (1 - 1.8 * np.cos(th) + 0.81))


def test_resonator_impulse_responses_decay():
    bank = resonance_bank(13, 100.0)
    impulse = np.zeros(400)
    impulse[0] = 1.0
    for b, a in zip(bank.b, bank.a):
        assert np.max(np.abs(lfilter(b, a, impulse)[200:])) < 1e-6


def test_constant_xi_ratios():
    icer, rphic = icc_ratios(np.full(20, 2.0))
    assert icer == pytest.approx(1.5)
    assert rphic == pytest.approx(0.0, abs=1e-12)


def test_icc_matrix_shape(vowel):
    feats = _icc(vowel)
    assert feats.icc.xi_matrix.shape == (20, 13)
    np.testing.assert_allclose(feats.icc.xi, np.log(feats.icc.xi_matrix + 1e-12).sum(axis=1))


def test_gain_shifts_xi_uniformly(vowel):
    base = _icc(vowel).icc.xi
    louder = _icc(Signal(samples=2.0 * vowel.samples, rate=vowel.rate)).icc.xi
    shift = louder - base
    np.testing.assert_allclose(shift, 13 * np.log(2.0 ** 4), rtol=1e-6)
    assert np.argmax(louder) == np.argmax(base)


def test_noise_changes_energy_ratio(vowel, noisy_vowel):
    assert _icc(vowel).icer != pytest.approx(_icc(noisy_vowel).icer, rel=1e-3)


def test_icc_requires_twenty_bands(vowel):
    grid = frame(vowel, 25, 10, WindowKind.HAMMING)
    with pytest.raises(ParameterError):
        icc_features(grid, gammatone_bank(10, vowel.rate, grid.frame_len))
