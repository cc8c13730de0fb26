import struct

import numpy as np
import pytest


def write_wav_bytes(path, samples, rate=16000):
    """Independent PCM16 mono writer for fixtures."""
    pcm = np.clip(np.round(np.asarray(samples) * 32768), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    header = b"".join([
        b"RIFF", struct.pack("<I", 36 + len(body)), b"WAVE",
        b"fmt ", struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16),
        b"data", struct.pack("<I", len(body)),
    ])
    path.write_bytes(header + body)


@pytest.fixture
def tiny_dataset(tmp_path):
    """Two clips (3 s and 2 s) plus a manifest covering every segment."""
    rng = np.random.default_rng(42)
    rows = []
    for clip_id, dur, speaker, split in [("clipA", 3.0, "s1", "train"),
                                         ("clipB", 2.0, "s2", "test")]:
        n = int(dur * 16000)
        t = np.arange(n) / 16000
        x = 0.2 * np.sin(2 * np.pi * (200 + 80 * rng.random()) * t)
        x += 0.05 * rng.standard_normal(n)
        write_wav_bytes(tmp_path / f"{clip_id}.wav", x)
        for start in range(0, n - 16000 + 1, 8000):
            rows.append(f"{clip_id}@{start},{clip_id}.wav,natural,{split},"
                        f"{speaker},mic,synthetic")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        "key,path,label,split,speaker_id,device_id,source\n" + "\n".join(rows) + "\n")
    return tmp_path, manifest
