"""Segmentation identical to the consumer: 1 s windows, 50% overlap.

Keys follow the "clip_id@start_sample" convention; trailing partial
windows are dropped. Segment energy is normalized to the same target RMS
the consumer's extraction path uses, so the two feature routes see the
same input.
"""

from __future__ import annotations

import numpy as np

WINDOW = 16000
HOP = 8000
TARGET_RMS = 0.1
SILENT_RMS = 1e-8


def segment_starts(n_samples: int) -> list[int]:
    if n_samples < WINDOW:
        return []
    return list(range(0, n_samples - WINDOW + 1, HOP))


def segment_keys(clip_id: str, n_samples: int) -> list[str]:
    return [f"{clip_id}@{start}" for start in segment_starts(n_samples)]


def normalize_rms(x: np.ndarray, target: float = TARGET_RMS) -> np.ndarray:
    rms = float(np.sqrt(np.mean(x ** 2)))
    if rms < SILENT_RMS:
        return x
    return x * (target / rms)


def iter_segments(samples: np.ndarray, clip_id: str,
                  target_rms: float = TARGET_RMS):
    """Yields (key, normalized 16000-sample window)."""
    for start in segment_starts(len(samples)):
        window = samples[start:start + WINDOW]
        yield f"{clip_id}@{start}", normalize_rms(window, target_rms)
