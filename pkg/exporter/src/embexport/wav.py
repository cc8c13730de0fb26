"""Minimal strict WAV reader for the pipeline format.

Accepts RIFF/WAVE, PCM16, mono, 16000 Hz only; samples map to float64 via
value/32768, matching the consumer's decode convention exactly. Unknown
chunks are skipped (word-aligned).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InputError

SAMPLE_RATE = 16000


def read_wav(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise InputError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = pos + 8
        if cid == b"fmt " and body + 16 <= len(raw):
            fmt = struct.unpack_from("<HHIIHH", raw, body)
        elif cid == b"data":
            if body + size > len(raw):
                raise InputError(f"{path}: data chunk truncated")
            data = raw[body:body + size]
        pos = body + size + (size & 1)

    if fmt is None or data is None:
        raise InputError(f"{path}: missing fmt or data chunk")
    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != 1 or bits != 16 or channels != 1 or rate != SAMPLE_RATE:
        raise InputError(
            f"{path}: need PCM16 mono {SAMPLE_RATE} Hz, got "
            f"format={audio_format} bits={bits} channels={channels} rate={rate}"
        )
    pcm = np.frombuffer(data[:len(data) - (len(data) % 2)], dtype="<i2")
    return pcm.astype(np.float64) / 32768.0
