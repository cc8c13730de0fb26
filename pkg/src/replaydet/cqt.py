"""Constant-Q transform and constant-Q cepstral coefficients.

The CQT uses 870 geometrically spaced bins (15-8000 Hz, 96 bins/octave,
Q = 1/(2^(1/96) - 1) ~ 138). Bin k analyses the signal with a Hann-windowed
complex exponential of length Q*fs/f_k, computed efficiently by multiplying
frame spectra with a precomputed sparse spectral kernel. Windows are capped
at 8192 samples: a 1 s segment physically cannot support Q=138 below
~270 Hz, so the lowest bins fall back to the 8192-sample resolution
(~2.8 Hz), which only smooths the log spectrum they feed.

CQCC per segment: log power CQT (floor 1e-10), linear resampling of the
geometric frequency axis to a uniform grid with spacing f_min/d (d = 16),
orthonormal DCT-II keeping c1..c12 per frame, then linear resampling of the
time axis to exactly 117 frames; 117 x 12 values frame-major = 1404 dims.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .dsp_features import LOG_FLOOR, SAMPLE_RATE, hann_window
from .features import KIND_CQCC, FeatureVector
from .preprocess import WINDOW_SAMPLES, Segment

CQT_HOP = 128
CQT_MAX_WINDOW = 8192
CQCC_N_COEFFS = 12
CQCC_FRAMES = 117
CQCC_DIM = CQCC_N_COEFFS * CQCC_FRAMES  # 1404
_KERNEL_SPARSITY = 1e-4


@dataclass(frozen=True)
class CqtConfig:
    f_min: float = 15.0
    f_max: float = 8000.0
    bins_per_octave: int = 96
    resample_period: int = 16

    @property
    def n_bins(self) -> int:
        return int(np.ceil(self.bins_per_octave * np.log2(self.f_max / self.f_min)))

    @property
    def q_factor(self) -> float:
        return 1.0 / (2.0 ** (1.0 / self.bins_per_octave) - 1.0)

    def center_frequencies(self) -> np.ndarray:
        k = np.arange(self.n_bins)
        return self.f_min * 2.0 ** (k / self.bins_per_octave)


DEFAULT_CQT = CqtConfig()


@lru_cache(maxsize=4)
def _spectral_kernel(cfg: CqtConfig, fs: int, n_fft: int):
    """Sparse one-sided spectral kernel; row k dotted with an rfft frame
    gives bin k of the CQT.

    The kernel drops the negative-frequency tail of each analysis window
    (<= -50 dB even for the lowest bins), which is irrelevant downstream.
    """
    freqs = cfg.center_frequencies()
    q = cfg.q_factor
    center = n_fft // 2
    rows = []
    for f_k in freqs:
        n_k = min(int(round(q * fs / f_k)), n_fft)
        offset = (n_fft - n_k) // 2
        m = np.arange(n_k)
        window = hann_window(n_k)
        kernel = np.zeros(n_fft, dtype=np.complex128)
        kernel[offset:offset + n_k] = (
            window
            * np.exp(2j * np.pi * f_k * (m + offset - center) / fs)
            / window.sum()
        )
        spec = np.conj(np.fft.fft(kernel)[:n_fft // 2 + 1]) / n_fft
        mags = np.abs(spec)
        spec[mags < _KERNEL_SPARSITY * mags.max()] = 0.0
        rows.append(spec)
    return sparse.csr_matrix(np.asarray(rows))


def cqt(samples: np.ndarray, cfg: CqtConfig = DEFAULT_CQT, fs: int = SAMPLE_RATE,
        hop: int = CQT_HOP, max_window: int = CQT_MAX_WINDOW) -> np.ndarray:
    """Constant-Q magnitude array, shape (n_bins, n_frames).

    Frames are centered every `hop` samples with reflection padding, so
    n_frames = floor(len(samples)/hop) + 1.
    """
    x = np.asarray(samples, dtype=np.float64)
    kernel = _spectral_kernel(cfg, fs, max_window)
    pad = max_window // 2
    padded = np.pad(x, pad, mode="reflect")
    starts = np.arange(len(x) // hop + 1) * hop
    frames = padded[starts[:, None] + np.arange(max_window)[None, :]]
    spectra = np.fft.rfft(frames, axis=1)
    return np.abs(kernel @ spectra.T)


@lru_cache(maxsize=4)
def _cqcc_resampler(cfg: CqtConfig):
    """Precomputed pieces of the CQCC frequency-axis resampling and DCT.

    Returns (lo_idx, frac, dct_rows): linear-interpolation gather indices
    and weights from the geometric bin grid onto the uniform grid with
    spacing f_min/resample_period, plus rows c1..c12 of the orthonormal
    DCT-II over that grid.
    """
    freqs = cfg.center_frequencies()
    step = cfg.f_min / cfg.resample_period
    n_lin = int(np.floor((freqs[-1] - freqs[0]) / step)) + 1
    grid = freqs[0] + step * np.arange(n_lin)
    lo_idx = np.clip(np.searchsorted(freqs, grid, side="right") - 1, 0, len(freqs) - 2)
    span = freqs[lo_idx + 1] - freqs[lo_idx]
    frac = np.clip((grid - freqs[lo_idx]) / span, 0.0, 1.0)

    k = np.arange(1, CQCC_N_COEFFS + 1)[:, None]
    m = np.arange(n_lin)[None, :]
    dct_rows = np.cos(np.pi * k * (2 * m + 1) / (2 * n_lin)) * np.sqrt(2.0 / n_lin)
    return lo_idx, frac, dct_rows


def cqcc(seg: Segment, cfg: CqtConfig = DEFAULT_CQT) -> FeatureVector:
    """1404-dim CQCC vector (117 frames x coefficients c1..c12, frame-major)."""
    if len(seg) != WINDOW_SAMPLES:
        raise ValueError(f"segment must have {WINDOW_SAMPLES} samples, got {len(seg)}")
    mags = cqt(seg.samples, cfg)
    log_power = np.log(np.maximum(mags ** 2, LOG_FLOOR))

    lo_idx, frac, dct_rows = _cqcc_resampler(cfg)
    uniform = (1.0 - frac[:, None]) * log_power[lo_idx] + frac[:, None] * log_power[lo_idx + 1]
    coeffs = dct_rows @ uniform  # (12, n_frames)

    n_frames = coeffs.shape[1]
    pos_in = np.linspace(0.0, 1.0, n_frames)
    pos_out = np.linspace(0.0, 1.0, CQCC_FRAMES)
    resampled = np.empty((CQCC_N_COEFFS, CQCC_FRAMES))
    for i in range(CQCC_N_COEFFS):
        resampled[i] = np.interp(pos_out, pos_in, coeffs[i])
    return FeatureVector(kind=KIND_CQCC, values=resampled.T.ravel(), key=seg.key)
