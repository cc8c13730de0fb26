"""Export job: manifest in, EMB1 embedding file out.

Weights load from a torch state-dict file; --random-weights SEED is an
explicit test mode that builds a seeded randomly initialized network (used
for fixtures and smoke runs where pretrained weights are unavailable).
Per-clip inference failures are recorded as gaps and the job continues;
the summary lists them so the consumer's MissingKey errors are traceable.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .emb1 import write_emb1
from .errors import InputError, MissingWeights
from .frontend import log_mel_patch
from .nets import EXPECTED_DIMS, SOUNDNET_TAPS, build_net
from .segments import TARGET_RMS, iter_segments
from .wav import read_wav

log = logging.getLogger("embexport")

MANIFEST_HEADER = ["key", "path", "label", "split", "speaker_id", "device_id", "source"]


@dataclass
class ExportJob:
    manifest: Path
    net: str  # "soundnet" or "vggish"
    out: Path
    layer: str = "conv5"  # soundnet tap; ignored for vggish
    weights: Path | None = None
    random_seed: int | None = None
    wav_root: Path | None = None
    target_rms: float = TARGET_RMS


@dataclass
class ExportSummary:
    written: int = 0
    gaps: list[str] = field(default_factory=list)


def read_manifest_clips(path: Path, wav_root: Path | None):
    """Returns ordered {clip_id: wav path} plus the manifest key list."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    root = wav_root if wav_root is not None else path.parent
    clips: dict[str, Path] = {}
    keys: list[str] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise InputError(
                f"{path}: expected header {','.join(MANIFEST_HEADER)}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise InputError(f"{path}: row {row_no}: bad column count")
            key, rel_path = row[0].strip(), row[1].strip()
            if "@" not in key:
                raise InputError(f"{path}: row {row_no}: key {key!r} lacks '@'")
            keys.append(key)
            clips.setdefault(key.rsplit("@", 1)[0], root / rel_path)
    if not clips:
        raise InputError(f"{path}: no records")
    return clips, keys


def load_net(job: ExportJob) -> torch.nn.Module:
    if job.weights is not None:
        if not Path(job.weights).is_file():
            raise MissingWeights(f"weights file not found: {job.weights}")
        net = build_net(job.net)
        state = torch.load(job.weights, map_location="cpu", weights_only=True)
        try:
            net.load_state_dict(state)
        except RuntimeError as exc:
            raise InputError(f"{job.weights}: state dict mismatch: {exc}") from exc
    elif job.random_seed is not None:
        torch.manual_seed(job.random_seed)
        net = build_net(job.net)  # init consumes the seeded stream
    else:
        raise MissingWeights(
            "no pretrained weights available: pass --weights FILE, or "
            "--random-weights SEED for an explicit test run"
        )
    net.eval()
    return net


def _embed_clip(net, job: ExportJob, samples: np.ndarray, clip_id: str):
    keys, inputs = [], []
    for key, window in iter_segments(samples, clip_id, job.target_rms):
        keys.append(key)
        if job.net == "vggish":
            inputs.append(log_mel_patch(window))
        else:
            inputs.append(window.astype(np.float32))
    if not keys:
        return []
    batch = torch.from_numpy(np.stack(inputs))
    with torch.no_grad():
        if job.net == "soundnet":
            out = net(batch, tap=job.layer)
        else:
            out = net(batch)
    return list(zip(keys, out.numpy().astype(np.float64)))


def run_export(job: ExportJob) -> ExportSummary:
    expected_dim = EXPECTED_DIMS[job.net]
    if job.net == "soundnet":
        if job.layer not in SOUNDNET_TAPS:
            raise InputError(f"unknown soundnet layer {job.layer!r}")
        tap_dim = SOUNDNET_TAPS[job.layer]
        if tap_dim != expected_dim:
            raise InputError(
                f"layer {job.layer} is {tap_dim}-wide, incompatible with the "
                f"EMB1 soundnet contract ({expected_dim}); use conv5 or conv6"
            )

    clips, manifest_keys = read_manifest_clips(Path(job.manifest), job.wav_root)
    net = load_net(job)

    vectors: dict[str, np.ndarray] = {}
    summary = ExportSummary()
    for clip_id, wav_path in clips.items():
        try:
            samples = read_wav(wav_path)
            for key, vec in _embed_clip(net, job, samples, clip_id):
                if not np.all(np.isfinite(vec)):
                    raise ValueError(f"non-finite embedding for {key}")
                vectors[key] = vec
        except Exception as exc:  # noqa: BLE001 - per-clip isolation
            lost = [k for k in manifest_keys if k.rsplit("@", 1)[0] == clip_id]
            summary.gaps.extend(lost)
            log.warning("clip %s failed (%s); %d keys skipped",
                        clip_id, exc, len(lost))

    missing = [k for k in manifest_keys if k not in vectors and k not in summary.gaps]
    summary.gaps.extend(missing)

    records = [(k, vectors[k]) for k in manifest_keys if k in vectors]
    write_emb1(job.out, job.net, expected_dim, records)
    summary.written = len(records)
    log.info("wrote %d records to %s (%d gaps)",
             summary.written, job.out, len(summary.gaps))
    return summary
