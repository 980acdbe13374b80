"""STFT analysis/synthesis with a sine window, and periodogram computation."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Waveform",
    "ComplexSpectrogram",
    "PowerSpectrogram",
    "sine_window",
    "stft",
    "istft",
    "periodogram",
]


@dataclass
class Waveform:
    """Mono time-domain signal, samples nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("waveform must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


@dataclass
class ComplexSpectrogram:
    """F x T complex STFT coefficients plus the frame grid that produced them.

    n_samples records the analyzed signal length so synthesis can strip the
    centering pad exactly.
    """

    bins: np.ndarray
    frame_len: int
    hop: int
    sample_rate: int
    n_samples: int

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 2:
            raise ValueError("bins must be an F x T grid")
        if self.bins.shape[0] != self.frame_len // 2 + 1:
            raise ValueError(
                "bin count %d inconsistent with frame_len %d"
                % (self.bins.shape[0], self.frame_len)
            )
        if self.hop > self.frame_len:
            raise ValueError("hop must not exceed frame_len")
        if not np.all(np.isfinite(self.bins)):
            raise ValueError("spectrogram contains non-finite entries")

    @property
    def n_bins(self):
        return self.bins.shape[0]

    @property
    def n_frames(self):
        return self.bins.shape[1]


@dataclass
class PowerSpectrogram:
    """F x T nonnegative periodogram values |.|^2 on the same frame grid."""

    values: np.ndarray
    frame_len: int
    hop: int
    sample_rate: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("values must be an F x T grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("power spectrogram contains non-finite entries")
        if np.any(self.values < 0):
            raise ValueError("power values must be nonnegative")

    @property
    def n_bins(self):
        return self.values.shape[0]

    @property
    def n_frames(self):
        return self.values.shape[1]


def sine_window(frame_len: int) -> np.ndarray:
    """Half-sample-offset sine window w[n] = sin(pi (n + 0.5) / N).

    With hop = N/4 the squared windows overlap-add to the constant N/(2*hop),
    which is what makes weighted overlap-add reconstruction exact.
    """
    if frame_len < 4 or frame_len % 4 != 0:
        raise ValueError(
            "frame_len must be a multiple of 4 and >= 4, got %d" % frame_len
        )
    n = np.arange(frame_len, dtype=np.float64)
    return np.sin(np.pi * (n + 0.5) / frame_len)


def _cola_constant(frame_len: int, hop: int) -> float:
    # Overlapped squared-window sum; constant because the shifted cosine
    # terms of sin^2 cancel whenever hop divides frame_len with >= 2 overlap.
    return frame_len / (2.0 * hop)


def _frame_count(n_samples: int, frame_len: int, hop: int) -> tuple[int, int]:
    """Return (n_frames, padded_len) for centered framing.

    frame_len - hop zeros go on both ends; the right pad is then extended to
    the next full-frame boundary so every input sample keeps full window
    coverage regardless of signal length.
    """
    pad = frame_len - hop
    base = n_samples + 2 * pad
    extra = (-(base - frame_len)) % hop
    padded = base + extra
    return (padded - frame_len) // hop + 1, padded


def stft(wave: Waveform, frame_len: int = 1024, hop: int = 256) -> ComplexSpectrogram:
    """Short-time Fourier transform with sine windowing and centered framing.

    Keeps only the nonnegative-frequency bins (F = frame_len/2 + 1).
    """
    x = wave.samples
    if x.size == 0:
        raise ValueError("cannot transform an empty signal")
    if hop > frame_len:
        raise ValueError("hop must not exceed frame_len")
    if frame_len % hop != 0:
        raise ValueError("hop must divide frame_len")
    window = sine_window(frame_len)

    pad = frame_len - hop
    n_frames, padded_len = _frame_count(x.size, frame_len, hop)
    buf = np.zeros(padded_len, dtype=np.float64)
    buf[pad:pad + x.size] = x

    offsets = np.arange(n_frames) * hop
    frames = buf[offsets[:, None] + np.arange(frame_len)[None, :]]
    bins = np.fft.rfft(frames * window, axis=1).T

    return ComplexSpectrogram(
        bins=bins,
        frame_len=frame_len,
        hop=hop,
        sample_rate=wave.sample_rate,
        n_samples=x.size,
    )


def istft(spec: ComplexSpectrogram) -> Waveform:
    """Inverse STFT by weighted overlap-add with the same sine window.

    Applies the window again at synthesis and divides by the constant
    overlapped squared-window sum, then removes the centering pad.
    """
    frame_len, hop = spec.frame_len, spec.hop
    window = sine_window(frame_len)
    cola = _cola_constant(frame_len, hop)

    n_frames = spec.n_frames
    expected_frames, padded_len = _frame_count(spec.n_samples, frame_len, hop)
    if n_frames != expected_frames:
        raise ValueError(
            "frame count %d inconsistent with n_samples %d"
            % (n_frames, spec.n_samples)
        )

    frames = np.fft.irfft(spec.bins.T, n=frame_len, axis=1) * window
    out = np.zeros(padded_len, dtype=np.float64)
    for t in range(n_frames):
        start = t * hop
        out[start:start + frame_len] += frames[t]
    out /= cola

    pad = frame_len - hop
    return Waveform(out[pad:pad + spec.n_samples], spec.sample_rate)


def periodogram(spec: ComplexSpectrogram) -> PowerSpectrogram:
    """Squared magnitude of every STFT coefficient."""
    return PowerSpectrogram(
        values=np.abs(spec.bins) ** 2,
        frame_len=spec.frame_len,
        hop=spec.hop,
        sample_rate=spec.sample_rate,
    )
