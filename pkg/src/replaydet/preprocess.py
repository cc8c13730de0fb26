"""Cut clips into overlapping fixed-length segments and normalize energy.

The pipeline convention is 1 s windows (16000 samples) with 50% overlap
(hop 8000); trailing partial windows are dropped so every segment has the
exact length the feature extractors require. Energy normalization rescales
each segment to a target RMS of 0.1 (~ -20 dBFS), leaving near-silent
segments untouched but flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip

WINDOW_SAMPLES = 16000
HOP_SAMPLES = 8000
TARGET_RMS = 0.1
SILENT_RMS = 1e-8

NATURAL = "natural"
EMITTED = "emitted"


@dataclass
class Segment:
    """Fixed window of samples with identity (clip id, start offset)."""

    samples: np.ndarray
    clip_id: str
    start_sample: int
    label: str | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def key(self) -> str:
        return f"{self.clip_id}@{self.start_sample}"

    def __len__(self) -> int:
        return len(self.samples)


def segment_keys(n_samples: int, clip_id: str,
                 window: int = WINDOW_SAMPLES, hop: int = HOP_SAMPLES) -> list[str]:
    """Keys of the segments segment() would produce, without materializing them."""
    if n_samples < window:
        return []
    count = (n_samples - window) // hop + 1
    return [f"{clip_id}@{i * hop}" for i in range(count)]


def segment(clip: AudioClip, window: int = WINDOW_SAMPLES,
            hop: int = HOP_SAMPLES, label: str | None = None) -> list[Segment]:
    """Split a clip into windows of `window` samples every `hop` samples.

    Returns floor((N - window)/hop) + 1 segments when N >= window, else an
    empty list; trailing partial windows are dropped.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if not 0 < hop <= window:
        raise ValueError(f"hop must be in (0, window], got {hop}")

    x = clip.samples
    out = []
    for start in range(0, len(x) - window + 1, hop):
        out.append(Segment(
            samples=x[start:start + window].copy(),
            clip_id=clip.id,
            start_sample=start,
            label=label,
        ))
    return out


def normalize_energy(seg: Segment, target_rms: float = TARGET_RMS) -> tuple[Segment, bool]:
    """Rescale a segment to the target RMS; returns (segment, silent flag).

    Near-silent input (RMS < 1e-8) is returned unchanged with the flag set
    so batch pipelines can log instead of aborting.
    """
    if target_rms <= 0:
        raise ValueError(f"target_rms must be positive, got {target_rms}")
    rms = float(np.sqrt(np.mean(seg.samples ** 2)))
    if rms < SILENT_RMS:
        return Segment(seg.samples.copy(), seg.clip_id, seg.start_sample, seg.label), True
    scaled = seg.samples * (target_rms / rms)
    return Segment(scaled, seg.clip_id, seg.start_sample, seg.label), False
