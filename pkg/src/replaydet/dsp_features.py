"""MFCC front end: framing, power spectrum, mel filterbank, cepstrum.

A 16000-sample segment is cut into 101 centered frames (25 ms window,
10 ms hop, reflection padding), each frame is Hann-windowed, zero-padded
to 512 points and turned into a 257-bin power spectrum. 26 HTK-mel
triangular filters (0-8000 Hz) feed a floored log and an orthonormal
DCT-II; coefficients c1..c12 per frame concatenate frame-major into the
1212-dim MFCC vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .features import KIND_MFCC, FeatureVector
from .preprocess import WINDOW_SAMPLES, Segment

SAMPLE_RATE = 16000
LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FrameConfig:
    frame_len: int = 400
    hop: int = 160
    n_fft: int = 512

    def n_frames(self, n_samples: int) -> int:
        # centered framing: one frame per hop position, both edges padded
        return n_samples // self.hop + 1


MFCC_FRAME = FrameConfig()
MFCC_N_MELS = 26
MFCC_N_COEFFS = 12
MFCC_DIM = MFCC_N_COEFFS * MFCC_FRAME.n_frames(WINDOW_SAMPLES)  # 12 * 101


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window, 0.5 - 0.5 cos(2 pi k / n)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_signal(x: np.ndarray, cfg: FrameConfig = MFCC_FRAME) -> np.ndarray:
    """Centered frames with reflection padding, shape (n_frames, frame_len)."""
    pad = cfg.frame_len // 2
    padded = np.pad(np.asarray(x, dtype=np.float64), pad, mode="reflect")
    n = len(x) // cfg.hop + 1
    starts = np.arange(n) * cfg.hop
    idx = starts[:, None] + np.arange(cfg.frame_len)[None, :]
    return padded[idx]


def power_spectrum(frame: np.ndarray, cfg: FrameConfig = MFCC_FRAME) -> np.ndarray:
    """Hann-windowed, zero-padded |DFT|^2 of one frame, bins 0..n_fft/2."""
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) != cfg.frame_len:
        raise ValueError(f"frame length must be {cfg.frame_len}, got {len(frame)}")
    spec = np.fft.rfft(frame * hann_window(cfg.frame_len), n=cfg.n_fft)
    return np.abs(spec) ** 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(n_mels: int = MFCC_N_MELS, n_fft: int = 512,
                   fs: int = SAMPLE_RATE, f_low: float = 0.0,
                   f_high: float = 8000.0) -> np.ndarray:
    """Triangular HTK-mel filters evaluated on the rfft bin grid.

    Shape (n_mels, n_fft//2 + 1); rows are non-negative with positive sum.
    """
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(f_low), hz_to_mel(f_high), n_mels + 2))
    bin_hz = np.arange(n_fft // 2 + 1) * (fs / n_fft)
    fb = np.zeros((n_mels, n_fft // 2 + 1))
    for m in range(n_mels):
        lo, mid, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        up = (bin_hz - lo) / (mid - lo)
        down = (hi - bin_hz) / (hi - mid)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


@lru_cache(maxsize=8)
def dct_ortho_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix, rows are basis functions (M @ M.T = I)."""
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    mat = np.cos(np.pi * k * (2 * m + 1) / (2 * n)) * np.sqrt(2.0 / n)
    mat[0] /= np.sqrt(2.0)
    return mat


def mfcc(seg: Segment) -> FeatureVector:
    """1212-dim MFCC vector (101 frames x coefficients c1..c12, frame-major)."""
    if len(seg) != WINDOW_SAMPLES:
        raise ValueError(f"segment must have {WINDOW_SAMPLES} samples, got {len(seg)}")
    frames = frame_signal(seg.samples) * hann_window(MFCC_FRAME.frame_len)
    pspec = np.abs(np.fft.rfft(frames, n=MFCC_FRAME.n_fft, axis=1)) ** 2
    mel_energy = pspec @ mel_filterbank().T
    log_mel = np.log(np.maximum(mel_energy, LOG_FLOOR))
    coeffs = log_mel @ dct_ortho_matrix(MFCC_N_MELS)[1:MFCC_N_COEFFS + 1].T
    return FeatureVector(kind=KIND_MFCC, values=coeffs.ravel(), key=seg.key)
