"""Synthetic two-class dataset: pseudo-speech and its replayed counterpart.

synth_speech() generates deterministic pseudo-speech (harmonic source with
drifting f0, two wandering formant resonators, syllabic amplitude
modulation). simulate_replay() passes a clip through a parametric
loudspeaker/room/microphone chain: band-pass filter, saturating
nonlinearity, exponential-decay reverb, additive noise, then renormalizes
to the input RMS. Loudspeakers distort mostly at the band edges, which is
exactly the cue the cepstral features are meant to pick up, so the channel
concentrates its energy differences there.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .audio_io import PIPELINE_RATE_HZ, AudioClip, write_wav
from .errors import TooFewSpeakers
from .manifest import ManifestRecord, write_manifest
from .preprocess import EMITTED, HOP_SAMPLES, NATURAL, WINDOW_SAMPLES, segment_keys

FS = PIPELINE_RATE_HZ


@dataclass(frozen=True)
class BandpassSpec:
    low_hz: float
    high_hz: float
    order: int = 4

    def __post_init__(self):
        if not 0.0 < self.low_hz < self.high_hz <= FS / 2:
            raise ValueError(
                f"need 0 < low < high <= {FS // 2}, got ({self.low_hz}, {self.high_hz})"
            )


@dataclass(frozen=True)
class ReverbSpec:
    rt60_s: float
    direct_ratio: float = 0.7

    def __post_init__(self):
        if self.rt60_s < 0:
            raise ValueError("rt60_s must be >= 0")
        if not 0.0 <= self.direct_ratio <= 1.0:
            raise ValueError("direct_ratio must be in [0, 1]")


@dataclass(frozen=True)
class ChannelConfig:
    """One playback/re-record chain; bandpass=None means no band-limiting,
    noise_snr_db=None means no additive noise, drive 0 disables saturation,
    rt60 0 disables reverb."""

    bandpass: BandpassSpec | None = None
    nonlinearity_drive: float = 0.0
    reverb: ReverbSpec | None = None
    noise_snr_db: float | None = None
    seed: int = 0
    name: str = "ch"

    def __post_init__(self):
        if self.nonlinearity_drive < 0:
            raise ValueError("nonlinearity_drive must be >= 0")


def _smooth_wander(rng: np.random.Generator, n: int, rate_hz: float) -> np.ndarray:
    """Slow random trajectory in [-1, 1] (sum of two low-frequency sines)."""
    t = np.arange(n) / FS
    f1 = rate_hz * (0.6 + 0.8 * rng.random())
    f2 = rate_hz * (1.3 + 1.2 * rng.random())
    p1, p2 = 2 * np.pi * rng.random(2)
    return 0.6 * np.sin(2 * np.pi * f1 * t + p1) + 0.4 * np.sin(2 * np.pi * f2 * t + p2)


def _resonator_blocks(x: np.ndarray, center_hz: np.ndarray, bandwidth_hz: float,
                      block: int = 320) -> np.ndarray:
    """Two-pole resonator with block-wise constant center frequency."""
    out = np.empty_like(x)
    zi = np.zeros(2)
    for start in range(0, len(x), block):
        stop = min(start + block, len(x))
        f_c = float(np.mean(center_hz[start:stop]))
        r = np.exp(-np.pi * bandwidth_hz / FS)
        theta = 2 * np.pi * f_c / FS
        b = np.array([1.0 - r])
        a = np.array([1.0, -2.0 * r * np.cos(theta), r * r])
        out[start:stop], zi = sps.lfilter(b, a, x[start:stop], zi=zi)
    return out


def synth_speech(seed: int, duration_s: float, clip_id: str = "") -> AudioClip:
    """Deterministic pseudo-speech clip: drifting f0 (90-250 Hz), two
    time-varying formants, ~4 Hz syllabic modulation, peak <= 0.9."""
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * FS))
    t = np.arange(n) / FS

    base_f0 = 110.0 + 90.0 * rng.random()
    f0 = np.clip(base_f0 * (1.0 + 0.18 * _smooth_wander(rng, n, 0.8)), 90.0, 250.0)
    phase = 2.0 * np.pi * np.cumsum(f0) / FS

    n_harmonics = int(np.floor(7600.0 / float(f0.max())))
    source = np.zeros(n)
    for h in range(1, n_harmonics + 1):
        source += np.sin(h * phase) / h

    f1 = 450.0 + 250.0 * _smooth_wander(rng, n, 1.1)   # 200-700 Hz
    f2 = 1700.0 + 700.0 * _smooth_wander(rng, n, 0.9)  # 1000-2400 Hz
    voiced = (0.7 * _resonator_blocks(source, f1, 120.0)
              + 0.5 * _resonator_blocks(source, f2, 180.0))

    syllable_rate = 3.2 + 1.6 * rng.random()
    syl_phase = 2 * np.pi * (syllable_rate * t + rng.random())
    envelope = 0.25 + 0.75 * (0.5 + 0.5 * np.sin(syl_phase)) ** 1.5
    fade = np.minimum(1.0, np.minimum(t, t[::-1]) / 0.05)

    x = voiced * envelope * fade
    x += 0.002 * rng.standard_normal(n)  # breath noise floor
    x *= 0.85 / np.max(np.abs(x))
    return AudioClip(samples=x, sample_rate_hz=FS, id=clip_id)


def _reverb_ir(spec: ReverbSpec, rng: np.random.Generator) -> np.ndarray:
    """Exponentially decaying noise tail with a direct-path spike at t=0."""
    n_ir = int(round(spec.rt60_s * FS))
    ir = np.zeros(max(n_ir, 1))
    ir[0] = spec.direct_ratio
    if n_ir > 1:
        t = np.arange(1, n_ir) / FS
        decay = np.exp(-np.log(1000.0) * t / spec.rt60_s)
        tail = rng.standard_normal(n_ir - 1) * decay
        tail *= (1.0 - spec.direct_ratio) / np.max(np.abs(tail))
        ir[1:] = tail
    return ir


def simulate_replay(clip: AudioClip, cfg: ChannelConfig) -> AudioClip:
    """Pass a clip through the channel; output is renormalized to the input
    RMS and hard-clipped to [-1, 1]. Deterministic given (clip, cfg)."""
    x = clip.samples.copy()
    in_rms = float(np.sqrt(np.mean(x ** 2)))

    if cfg.bandpass is not None:
        nyq = FS / 2
        sos = sps.butter(cfg.bandpass.order,
                         [cfg.bandpass.low_hz / nyq, cfg.bandpass.high_hz / nyq],
                         btype="band", output="sos")
        x = sps.sosfilt(sos, x)

    if cfg.nonlinearity_drive > 0:
        d = cfg.nonlinearity_drive
        x = np.tanh(d * x) / np.tanh(d)

    # per-clip noise/reverb stream, deterministic in (cfg.seed, clip.id)
    rng = np.random.default_rng([cfg.seed, zlib.crc32(clip.id.encode("utf-8"))])

    if cfg.reverb is not None and cfg.reverb.rt60_s > 0:
        ir = _reverb_ir(cfg.reverb, rng)
        x = sps.fftconvolve(x, ir)[:len(x)]

    if cfg.noise_snr_db is not None:
        sig_rms = float(np.sqrt(np.mean(x ** 2)))
        noise_rms = sig_rms * 10.0 ** (-cfg.noise_snr_db / 20.0)
        x = x + noise_rms * rng.standard_normal(len(x))

    out_rms = float(np.sqrt(np.mean(x ** 2)))
    if out_rms > 0 and in_rms > 0:
        x *= in_rms / out_rms
    return AudioClip(samples=np.clip(x, -1.0, 1.0), sample_rate_hz=FS, id=clip.id)


DEFAULT_CHANNELS = (
    ChannelConfig(bandpass=BandpassSpec(250.0, 3400.0, order=4),
                  nonlinearity_drive=2.5,
                  reverb=ReverbSpec(rt60_s=0.25, direct_ratio=0.7),
                  noise_snr_db=22.0, seed=101, name="tvset"),
    ChannelConfig(bandpass=BandpassSpec(120.0, 6000.0, order=4),
                  nonlinearity_drive=1.2,
                  reverb=ReverbSpec(rt60_s=0.12, direct_ratio=0.8),
                  noise_snr_db=28.0, seed=102, name="bookshelf"),
    ChannelConfig(bandpass=BandpassSpec(400.0, 4500.0, order=6),
                  nonlinearity_drive=4.0,
                  reverb=ReverbSpec(rt60_s=0.4, direct_ratio=0.6),
                  noise_snr_db=18.0, seed=103, name="phone"),
)


def _speaker_splits(n_speakers: int) -> list[str]:
    n_train = int(np.floor(0.6 * n_speakers))
    n_val = max(int(np.floor(0.2 * n_speakers)), 1)
    splits = ["train"] * n_train + ["val"] * n_val
    splits += ["test"] * (n_speakers - len(splits))
    return splits


def build_synthetic_dataset(out_dir: str | Path, n_speakers: int = 10,
                            clips_per_speaker: int = 6,
                            channels: tuple[ChannelConfig, ...] = DEFAULT_CHANNELS,
                            seed: int = 0,
                            duration_range_s: tuple[float, float] = (3.0, 5.0),
                            ) -> list[ManifestRecord]:
    """Write natural and replayed WAVs plus a segment manifest.

    Speakers are split 60/20/20 into train/val/test, so the emitted:natural
    segment ratio equals the channel count in every split. Fully
    reproducible from (seed, channels).
    """
    if n_speakers < 5:
        raise TooFewSpeakers(
            f"need at least 5 speakers for a 60/20/20 split, got {n_speakers}"
        )
    out_dir = Path(out_dir)
    wav_dir = out_dir / "wav"
    seeds = np.random.SeedSequence(seed).spawn(n_speakers)
    split_rng = np.random.default_rng([seed, 0xD5])
    split_names = _speaker_splits(n_speakers)
    speaker_order = split_rng.permutation(n_speakers)

    records: list[ManifestRecord] = []
    for s in range(n_speakers):
        speaker_id = f"spk{s:02d}"
        split = split_names[int(np.flatnonzero(speaker_order == s)[0])]
        clip_seeds = seeds[s].spawn(clips_per_speaker)
        for c in range(clips_per_speaker):
            clip_rng = np.random.default_rng(clip_seeds[c])
            lo, hi = duration_range_s
            duration = lo + (hi - lo) * clip_rng.random()
            clip_id = f"{speaker_id}_c{c:02d}"
            clip = synth_speech(clip_seeds[c].spawn(1)[0], duration, clip_id)

            versions = [(clip, NATURAL, "mic")]
            for j, ch in enumerate(channels):
                emitted = simulate_replay(clip, ch)
                emitted.id = f"{clip_id}_ch{j}"
                versions.append((emitted, EMITTED, ch.name))

            for version, label, device in versions:
                rel_path = f"wav/{version.id}.wav"
                write_wav(version, out_dir / rel_path)
                for key in segment_keys(len(version), version.id,
                                        WINDOW_SAMPLES, HOP_SAMPLES):
                    records.append(ManifestRecord(
                        key=key, path=rel_path, label=label, split=split,
                        speaker_id=speaker_id, device_id=device, source="synthetic",
                    ))

    write_manifest(out_dir / "manifest.csv", records)
    return records
