"""Log-mel spectrogram front end for the VGGish-style network.

Standard VGGish input geometry: 25 ms Hann frames every 10 ms (no
centering), 512-point magnitude spectra, 64 HTK-mel bands over
125-7500 Hz, log(mel + 0.01), and a 96-frame example window. A 1 s
segment yields 98 frames; the central 96 are kept (one frame cropped per
side), which is this exporter's documented alignment choice.
"""

from __future__ import annotations

import numpy as np

SAMPLE_RATE = 16000
FRAME_LEN = 400
HOP = 160
N_FFT = 512
N_MELS = 64
MEL_LOW_HZ = 125.0
MEL_HIGH_HZ = 7500.0
LOG_OFFSET = 0.01
EXAMPLE_FRAMES = 96


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


_MEL_MATRIX = None


def mel_matrix() -> np.ndarray:
    """(n_fft//2+1, N_MELS) triangular weights on the rfft bin grid."""
    global _MEL_MATRIX
    if _MEL_MATRIX is None:
        edges = _mel_to_hz(np.linspace(_hz_to_mel(MEL_LOW_HZ),
                                       _hz_to_mel(MEL_HIGH_HZ), N_MELS + 2))
        bin_hz = np.arange(N_FFT // 2 + 1) * (SAMPLE_RATE / N_FFT)
        weights = np.zeros((N_FFT // 2 + 1, N_MELS))
        for m in range(N_MELS):
            lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
            up = (bin_hz - lo) / (mid - lo)
            down = (hi - bin_hz) / (hi - mid)
            weights[:, m] = np.maximum(0.0, np.minimum(up, down))
        _MEL_MATRIX = weights
    return _MEL_MATRIX


def log_mel_patch(samples: np.ndarray) -> np.ndarray:
    """(EXAMPLE_FRAMES, N_MELS) float32 log-mel patch for one 1 s segment."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) < FRAME_LEN:
        raise ValueError(f"segment too short: {len(x)} samples")
    n_frames = 1 + (len(x) - FRAME_LEN) // HOP
    starts = np.arange(n_frames) * HOP
    frames = x[starts[:, None] + np.arange(FRAME_LEN)[None, :]] * _hann(FRAME_LEN)
    magnitude = np.abs(np.fft.rfft(frames, n=N_FFT, axis=1))
    log_mel = np.log(magnitude @ mel_matrix() + LOG_OFFSET)

    if n_frames < EXAMPLE_FRAMES:
        raise ValueError(f"segment yields {n_frames} < {EXAMPLE_FRAMES} frames")
    crop = (n_frames - EXAMPLE_FRAMES) // 2
    return log_mel[crop:crop + EXAMPLE_FRAMES].astype(np.float32)
