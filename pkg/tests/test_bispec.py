import numpy as np
import pytest

from src.features.bispec import (
    BispectralAccumulator,
    bicepstral_distances,
    bicepstral_features,
    bicepstrum,
    bicepstrum_interference,
    bispectrum,
    cap_frames,
    interference_index,
    one_dim_indices,
    triple_correlation,
)
from src.utils.exceptions import InsufficientDataError, ParameterError


def _naive_triple_correlation(x):
    N = x.size
    gamma = np.zeros((N, N))
    for n1 in range(N):
        for n2 in range(N):
            gamma[n1, n2] = sum(x[n] * x[(n + n1) % N] * x[(n + n2) % N] for n in range(N)) / N
    return gamma


def test_triple_correlation_of_constant():
    np.testing.assert_allclose(triple_correlation(np.full(8, 2.0)), 8.0)


def test_triple_correlation_matches_definition(rng):
    x = rng.standard_normal(12)
    gamma = triple_correlation(x)
    np.testing.assert_allclose(gamma, _naive_triple_correlation(x), atol=1e-12)
    assert gamma[0, 0] == pytest.approx(np.mean(x ** 3))


def test_bispectrum_closed_form(rng):
    for _ in range(50):
        N = int(rng.integers(4, 33))
        x = rng.standard_normal(N)
        X = np.fft.fft(x)
        k = np.arange(N)
        expected = X[:, None] * X[None, :] * np.conj(X[(k[:, None] + k[None, :]) % N]) / N
        B = bispectrum(x).values
        assert np.linalg.norm(B - expected) <= 1e-6 * np.linalg.norm(expected)


def test_bispectrum_and_bicepstrum_are_symmetric(rng):
    x = rng.standard_normal(16)
    B = bispectrum(x).values
    np.testing.assert_allclose(B, B.T, atol=1e-9)
    c = bicepstrum(x).real_part
    np.testing.assert_allclose(c, c.T, atol=1e-9)


def test_one_dim_indices_are_diagonals(rng):
    x = rng.standard_normal(16)
    idx = one_dim_indices(x)
    np.testing.assert_allclose(idx.rho, np.diagonal(bicepstrum(x).real_part))
    np.testing.assert_allclose(idx.vartheta, np.abs(np.diagonal(bispectrum(x).values)))


def test_phase_coupling_survives_averaging(rng):
    N, k1, k2 = 64, 5, 9
    n = np.arange(N)

    def averaged(coupled):
        total = np.zeros((N, N), dtype=complex)
        for _ in range(1000):
            p1, p2, p3 = rng.uniform(0, 2 * np.pi, 3)
            p3 = p1 + p2 if coupled else p3
            x = (np.cos(2 * np.pi * k1 * n / N + p1) + np.cos(2 * np.pi * k2 * n / N + p2)
                 + np.cos(2 * np.pi * (k1 + k2) * n / N + p3))
            total += bispectrum(x).values
        return np.abs(total[k1, k2]) / 1000

    assert averaged(True) > 10 * averaged(False)


def test_frame_length_limits():
    with pytest.raises(ParameterError):
        bispectrum(np.ones(3))
    with pytest.raises(ParameterError):
        bispectrum(np.ones(1025))
    assert cap_frames(np.ones((2, 2048)), 1024).shape == (2, 1024)


def test_single_frame_is_perfectly_coherent(rng):
    feats = bicepstral_features(rng.standard_normal((1, 64)), rate=16000)
    assert feats.bcii == pytest.approx(0.0, abs=1e-12)
    assert feats.lfebc + feats.hfebc == pytest.approx(1.0)


def test_repeated_frames(rng):
    frames = np.tile(rng.standard_normal(32), (5, 1))
    assert bicepstral_features(frames, rate=16000).bcii == pytest.approx(0.0, abs=1e-12)

    distances = bicepstral_distances(frames)
    for sequence in distances:
        assert sequence.shape == (4,)
        np.testing.assert_allclose(sequence, 0.0, atol=1e-12)

    interference = bicepstrum_interference(frames)
    assert interference.bcmii == pytest.approx(0.0, abs=1e-12)


def test_gain_leaves_bispectral_phase_unchanged(rng):
    x = rng.standard_normal(32)
    distances = bicepstral_distances(np.stack([x, 2 * x]))
    assert distances.bpd[0] == pytest.approx(0.0, abs=1e-9)


def test_distance_against_direct_computation(rng):
    frames = rng.standard_normal((2, 16))
    c = [bicepstrum(f).complex_variant for f in frames]
    B = [bispectrum(f).values for f in frames]
    distances = bicepstral_distances(frames)
    assert distances.bcmd[0] == pytest.approx(np.sum(np.abs(np.abs(c[1]) - np.abs(c[0]))))
    assert distances.bmd[0] == pytest.approx(np.sum(np.abs(np.abs(B[1]) - np.abs(B[0]))))


def test_interference_index_of_two_frames():
    assert interference_index([0.0, 5.0], 16) == pytest.approx(1 / 255)
    assert np.isnan(interference_index([0.0, 0.0], 16))


def test_sequences_need_two_frames(rng):
    acc = BispectralAccumulator(16000, 350).add_all(rng.standard_normal((1, 16)))
    with pytest.raises(InsufficientDataError):
        acc.distance_sequences()
    with pytest.raises(InsufficientDataError):
        acc.interference()


def test_mixed_frame_lengths_rejected(rng):
    acc = BispectralAccumulator(16000, 350)
    acc.add(rng.standard_normal(16))
    with pytest.raises(ParameterError):
        acc.add(rng.standard_normal(32))
