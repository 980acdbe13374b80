"""Tests for navae.dsp: sine window, STFT/iSTFT round trip, periodogram."""

import numpy as np
import pytest

from navae.dsp import (
    ComplexSpectrogram,
    Waveform,
    istft,
    periodogram,
    sine_window,
    stft,
)

SR = 16000


def _rand_wave(rng, n, sr=SR):
    return Waveform(rng.uniform(-1, 1, n), sr)


# ---------------------------------------------------------------------------
# sine_window
# ---------------------------------------------------------------------------


def test_window_closed_form_len4():
    w = sine_window(4)
    expect = np.sin(np.pi * np.array([1, 3, 5, 7]) / 8.0)
    np.testing.assert_allclose(w, expect, rtol=0, atol=1e-15)


def test_window_symmetric_and_bounded():
    w = sine_window(1024)
    assert w.shape == (1024,)
    np.testing.assert_allclose(w, w[::-1], atol=1e-15)
    assert np.all(w > 0) and np.all(w <= 1.0)
    assert np.argmax(w) in (511, 512)


def test_window_cola_squared_sum_constant():
    # Direct summation of the overlapped squared windows at 25% hop.
    n, hop = 1024, 256
    w2 = sine_window(n) ** 2
    n_shifts = 7
    acc = np.zeros(n + (n_shifts - 1) * hop)
    for k in range(n_shifts):
        acc[k * hop:k * hop + n] += w2
    # positions covered by all 4 overlapping windows
    interior = acc[3 * hop:(n_shifts - 1) * hop + n - 3 * hop]
    np.testing.assert_allclose(interior, 2.0, rtol=0, atol=1e-12)


@pytest.mark.parametrize("bad", [3, 6, 10, 0, 2])
def test_window_rejects_non_multiple_of_four(bad):
    with pytest.raises(ValueError):
        sine_window(bad)


# ---------------------------------------------------------------------------
# stft
# ---------------------------------------------------------------------------


def test_stft_zero_signal_gives_zero_spectrogram():
    spec = stft(Waveform(np.zeros(SR), SR), 1024, 256)
    assert spec.n_bins == 513
    assert np.all(spec.bins == 0)


def test_stft_frame_count_and_round_trip_16384():
    rng = np.random.default_rng(0)
    wave = _rand_wave(rng, 16384)
    spec = stft(wave, 1024, 256)
    # centered framing: 768 zeros on both ends, full frames only
    assert spec.n_frames == (16384 + 2 * 768 - 1024) // 256 + 1
    rec = istft(spec)
    err = np.linalg.norm(rec.samples - wave.samples) / np.linalg.norm(wave.samples)
    assert err <= 1e-10


def test_stft_cosine_at_bin_center_concentrates_energy():
    # Exact-bin cosine: with the half-offset sine window the energy lands in
    # the three bins around k, with k itself the dominant one.
    n_fft, hop, k = 1024, 256, 37
    freq = k * SR / n_fft
    t = np.arange(2 * SR)
    wave = Waveform(np.cos(2 * np.pi * freq * t / SR), SR)
    power = periodogram(stft(wave, n_fft, hop)).values
    for frame in (10, power.shape[1] // 2, power.shape[1] - 10):
        col = power[:, frame]
        assert np.argmax(col) == k
        assert col[k - 1:k + 2].sum() / col.sum() >= 0.99


def test_stft_linearity():
    rng = np.random.default_rng(1)
    x = _rand_wave(rng, 5000)
    y = _rand_wave(rng, 5000)
    a, b = 0.7, -1.3
    combined = stft(Waveform(a * x.samples + b * y.samples, SR), 512, 128)
    expect = a * stft(x, 512, 128).bins + b * stft(y, 512, 128).bins
    np.testing.assert_allclose(combined.bins, expect, atol=1e-12)


def test_stft_rejects_empty_signal():
    with pytest.raises(ValueError):
        stft(Waveform(np.zeros(0), SR), 1024, 256)


def test_stft_rejects_hop_above_frame_len():
    with pytest.raises(ValueError):
        stft(Waveform(np.zeros(100), SR), 64, 128)


# ---------------------------------------------------------------------------
# istft
# ---------------------------------------------------------------------------


def test_istft_zero_spectrogram_gives_silence():
    spec = stft(Waveform(np.ones(4000), SR), 1024, 256)
    spec.bins[:] = 0
    rec = istft(spec)
    assert len(rec) == 4000
    assert np.all(rec.samples == 0)


@pytest.mark.parametrize("n", [16000, 16001, 12345, 777])
def test_round_trip_white_noise_arbitrary_lengths(n):
    rng = np.random.default_rng(n)
    wave = _rand_wave(rng, n)
    rec = istft(stft(wave, 1024, 256))
    assert len(rec) == n
    err = np.linalg.norm(rec.samples - wave.samples) / np.linalg.norm(wave.samples)
    assert err <= 1e-10


def test_round_trip_impulse_small_frame():
    # frame_len=8 keeps the windowed overlap-add hand-checkable
    for pos in (0, 3, 9, 19):
        x = np.zeros(20)
        x[pos] = 1.0
        rec = istft(stft(Waveform(x, SR), 8, 2))
        assert np.argmax(np.abs(rec.samples)) == pos
        np.testing.assert_allclose(rec.samples, x, atol=1e-14)


def test_istft_rejects_inconsistent_bin_count():
    spec = stft(Waveform(np.ones(4000), SR), 1024, 256)
    with pytest.raises(ValueError):
        ComplexSpectrogram(
            bins=spec.bins[:-1],
            frame_len=1024,
            hop=256,
            sample_rate=SR,
            n_samples=4000,
        )


def test_istft_rejects_inconsistent_frame_count():
    spec = stft(Waveform(np.ones(4000), SR), 1024, 256)
    clipped = ComplexSpectrogram(
        bins=spec.bins[:, :-2],
        frame_len=1024,
        hop=256,
        sample_rate=SR,
        n_samples=4000,
    )
    with pytest.raises(ValueError):
        istft(clipped)


# ---------------------------------------------------------------------------
# periodogram
# ---------------------------------------------------------------------------


def test_periodogram_zero_and_elementwise():
    spec = stft(Waveform(np.zeros(2000), SR), 512, 128)
    assert np.all(periodogram(spec).values == 0)
    spec.bins[5, 7] = 3 + 4j
    assert periodogram(spec).values[5, 7] == pytest.approx(25.0)


def test_periodogram_parseval_per_frame():
    rng = np.random.default_rng(7)
    n_fft, hop = 512, 128
    wave = _rand_wave(rng, 6000)
    spec = stft(wave, n_fft, hop)
    power = periodogram(spec).values
    window = sine_window(n_fft)

    pad = n_fft - hop
    buf = np.zeros(pad * 2 + 6000 + hop)
    buf[pad:pad + 6000] = wave.samples
    for t in (4, 10, 17):
        frame = buf[t * hop:t * hop + n_fft] * window
        time_energy = np.sum(frame**2)
        col = power[:, t]
        # one-sided spectrum: double the interior bins
        freq_energy = (col[0] + col[-1] + 2 * col[1:-1].sum()) / n_fft
        assert freq_energy == pytest.approx(time_energy, rel=1e-12)


def test_periodogram_invariant_to_global_phase():
    rng = np.random.default_rng(8)
    spec = stft(_rand_wave(rng, 3000), 512, 128)
    rotated = ComplexSpectrogram(
        bins=spec.bins * np.exp(1j * 0.813),
        frame_len=512,
        hop=128,
        sample_rate=SR,
        n_samples=3000,
    )
    np.testing.assert_allclose(
        periodogram(rotated).values, periodogram(spec).values, atol=1e-12
    )
