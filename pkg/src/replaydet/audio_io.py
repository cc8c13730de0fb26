"""Strict WAV decode/encode for the 16 kHz mono PCM16 pipeline format.

Only RIFF/WAVE files with fmt audio-format 1 (PCM), 16-bit, 1 channel,
16000 Hz are accepted; anything else is rejected rather than converted, so
corpus errors surface instead of being silently resampled. Extra chunks
(LIST, fact, ...) are skipped. The PCM16 -> float mapping is value/32768,
which makes -1.0 exactly representable.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ChannelMismatch,
    IoFailure,
    NotWav,
    RateMismatch,
    TruncatedFile,
    UnsupportedEncoding,
)

PIPELINE_RATE_HZ = 16000
_PCM16_SCALE = 32768.0


@dataclass
class AudioClip:
    """Decoded mono signal; samples are float64 in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int = PIPELINE_RATE_HZ
    id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def read_wav(path: str | Path, clip_id: str | None = None) -> AudioClip:
    """Decode a PCM16 mono 16 kHz WAV file into an AudioClip.

    Raises NotWav, UnsupportedEncoding, ChannelMismatch, RateMismatch or
    TruncatedFile on any deviation from the pipeline format.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise NotWav(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body_start = pos + 8
        if cid == b"fmt ":
            if size < 16 or body_start + 16 > len(raw):
                raise TruncatedFile(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", raw, body_start)
        elif cid == b"data":
            if body_start + size > len(raw):
                raise TruncatedFile(
                    f"{path}: data chunk declares {size} bytes, "
                    f"only {len(raw) - body_start} present"
                )
            data = raw[body_start:body_start + size]
        # chunks are word-aligned: odd sizes carry one pad byte
        pos = body_start + size + (size & 1)

    if fmt is None:
        raise NotWav(f"{path}: missing fmt chunk")
    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1 or bits != 16:
        raise UnsupportedEncoding(
            f"{path}: need PCM16, got format={audio_format} bits={bits}"
        )
    if channels != 1:
        raise ChannelMismatch(f"{path}: need mono, got {channels} channels")
    if rate != PIPELINE_RATE_HZ:
        raise RateMismatch(f"{path}: need {PIPELINE_RATE_HZ} Hz, got {rate} Hz")
    if data is None:
        raise TruncatedFile(f"{path}: missing data chunk")

    samples = np.frombuffer(data[:len(data) - (len(data) % 2)], dtype="<i2")
    return AudioClip(
        samples=samples.astype(np.float64) / _PCM16_SCALE,
        sample_rate_hz=rate,
        id=clip_id if clip_id is not None else path.stem,
    )


def write_wav(clip: AudioClip, path: str | Path) -> None:
    """Encode a clip as PCM16 mono WAV; values are rounded to the nearest
    PCM level and +1.0 saturates at 32767."""
    x = np.asarray(clip.samples, dtype=np.float64)
    pcm = np.clip(np.round(x * _PCM16_SCALE), -32768, 32767).astype("<i2")
    body = pcm.tobytes()

    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(body)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 1, 1, clip.sample_rate_hz,
                    clip.sample_rate_hz * 2, 2, 16),
        b"data",
        struct.pack("<I", len(body)),
    ])
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(header + body)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
