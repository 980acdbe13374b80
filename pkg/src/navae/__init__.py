"""Noise-aware VAE speech enhancement toolkit.

A clean-speech VAE prior, a noise-aware encoder trained by latent KL
alignment on noisy-clean pairs, MCEM enhancement with an NMF noise model and
Wiener filtering, a supervised mask baseline, and SI-SDR evaluation.
"""

from navae.dsp import (
    ComplexSpectrogram,
    PowerSpectrogram,
    Waveform,
    istft,
    periodogram,
    sine_window,
    stft,
)

__version__ = "0.1.0"
