#!/usr/bin/env python3
"""Regenerate the committed EMB1 fixtures consumed by the main package's
acceptance round-trip test.

Writes, under tests/fixtures/emb1/ at the repository root:
  fixture_a.wav, fixture_b.wav   deterministic test clips
  manifest.csv                   one row per 1 s / 50%-overlap segment
  vggish.emb1, soundnet.emb1     exporter output (seeded random weights)
  expected_values.json           the same vectors as plain JSON, for the
                                 independent value comparison

Run from anywhere: python3 exporter/scripts/make_fixtures.py
"""

import json
import struct
import sys
from pathlib import Path

import numpy as np

from embexport.export import ExportJob, run_export
from embexport.emb1 import read_emb1
from embexport.segments import segment_keys

OUT_DIR = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "emb1"

CLIPS = [("fixture_a", 2.5, 210.0), ("fixture_b", 3.0, 150.0)]
SEEDS = {"vggish": 20260811, "soundnet": 20260812}


def write_wav(path: Path, samples: np.ndarray, rate=16000) -> None:
    pcm = np.clip(np.round(samples * 32768), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    path.write_bytes(b"".join([
        b"RIFF", struct.pack("<I", 36 + len(body)), b"WAVE",
        b"fmt ", struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16),
        b"data", struct.pack("<I", len(body)), body,
    ]))


def make_clip(seed: int, duration_s: float, f0: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = int(duration_s * 16000)
    t = np.arange(n) / 16000
    x = 0.25 * np.sin(2 * np.pi * f0 * t)
    x += 0.15 * np.sin(2 * np.pi * (3.1 * f0) * t + 0.7)
    x += 0.04 * rng.standard_normal(n)
    x *= 0.6 + 0.4 * np.sin(2 * np.pi * 3.0 * t) ** 2
    return x


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    rows = []
    for i, (clip_id, dur, f0) in enumerate(CLIPS):
        samples = make_clip(1000 + i, dur, f0)
        write_wav(OUT_DIR / f"{clip_id}.wav", samples)
        split = "train" if i == 0 else "test"
        for key in segment_keys(clip_id, len(samples)):
            rows.append(f"{key},{clip_id}.wav,natural,{split},spk_{clip_id},"
                        f"mic,synthetic")
    manifest = OUT_DIR / "manifest.csv"
    manifest.write_text(
        "key,path,label,split,speaker_id,device_id,source\n"
        + "\n".join(rows) + "\n")

    sidecar = {}
    for net, seed in SEEDS.items():
        out = OUT_DIR / f"{net}.emb1"
        summary = run_export(ExportJob(manifest=manifest, net=net, out=out,
                                       random_seed=seed))
        if summary.gaps:
            print(f"unexpected gaps for {net}: {summary.gaps}", file=sys.stderr)
            return 1
        _, _, records = read_emb1(out)
        sidecar[net] = {key: [float(v) for v in values]
                        for key, values in records}
        print(f"{net}: {summary.written} records -> {out}")

    (OUT_DIR / "expected_values.json").write_text(
        json.dumps(sidecar, sort_keys=True))
    print(f"sidecar -> {OUT_DIR / 'expected_values.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
