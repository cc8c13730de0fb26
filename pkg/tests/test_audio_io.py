"""WAV decode/encode against independently constructed fixtures."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replaydet.audio_io import AudioClip, read_wav, write_wav
from replaydet.errors import (
    ChannelMismatch,
    NotWav,
    RateMismatch,
    TruncatedFile,
    UnsupportedEncoding,
)


def build_wav_bytes(pcm: np.ndarray, rate=16000, channels=1, bits=16,
                    audio_format=1, extra_chunks=(), data_size=None):
    """Independent WAV writer used as the fixture oracle."""
    body = pcm.astype("<i2").tobytes()
    declared = len(body) if data_size is None else data_size
    chunks = b""
    for cid, payload in extra_chunks:
        chunks += cid + struct.pack("<I", len(payload)) + payload
        if len(payload) % 2:
            chunks += b"\x00"
    fmt = struct.pack("<IHHIIHH", 16, audio_format, channels, rate,
                      rate * channels * bits // 8, channels * bits // 8, bits)
    payload = chunks + b"fmt " + fmt + b"data" + struct.pack("<I", declared) + body
    return b"RIFF" + struct.pack("<I", 4 + len(payload)) + b"WAVE" + payload


def test_sine_fixture_decodes_sample_exact(tmp_path):
    t = np.arange(16000) / 16000.0
    ints = np.round(0.6 * np.sin(2 * np.pi * 440.0 * t) * 32767).astype(np.int16)
    path = tmp_path / "sine.wav"
    path.write_bytes(build_wav_bytes(ints))

    clip = read_wav(path)
    assert len(clip) == 16000
    assert clip.sample_rate_hz == 16000
    np.testing.assert_array_equal(clip.samples, ints.astype(np.float64) / 32768.0)
    assert np.max(np.abs(clip.samples)) == pytest.approx(0.6 * 32767 / 32768, rel=1e-3)


def test_sample_count_follows_data_chunk(tmp_path):
    pcm = np.zeros(1234, dtype=np.int16)
    path = tmp_path / "z.wav"
    path.write_bytes(build_wav_bytes(pcm))
    assert len(read_wav(path)) == 1234


def test_wrong_rate_rejected(tmp_path):
    path = tmp_path / "44k.wav"
    path.write_bytes(build_wav_bytes(np.zeros(100, dtype=np.int16), rate=44100))
    with pytest.raises(RateMismatch):
        read_wav(path)


def test_stereo_rejected(tmp_path):
    path = tmp_path / "st.wav"
    path.write_bytes(build_wav_bytes(np.zeros(100, dtype=np.int16), channels=2))
    with pytest.raises(ChannelMismatch):
        read_wav(path)


def test_non_pcm_rejected(tmp_path):
    path = tmp_path / "f32.wav"
    path.write_bytes(build_wav_bytes(np.zeros(10, dtype=np.int16), audio_format=3))
    with pytest.raises(UnsupportedEncoding):
        read_wav(path)


def test_not_riff_rejected(tmp_path):
    path = tmp_path / "x.wav"
    path.write_bytes(b"OggS" + b"\x00" * 64)
    with pytest.raises(NotWav):
        read_wav(path)


def test_truncated_data_rejected(tmp_path):
    path = tmp_path / "cut.wav"
    path.write_bytes(build_wav_bytes(np.zeros(10, dtype=np.int16), data_size=400))
    with pytest.raises(TruncatedFile):
        read_wav(path)


def test_extra_chunks_skipped(tmp_path):
    ints = np.arange(-5, 6, dtype=np.int16)
    # LIST with odd size exercises the word-alignment pad byte
    path = tmp_path / "extra.wav"
    path.write_bytes(build_wav_bytes(
        ints, extra_chunks=[(b"LIST", b"INFOx"), (b"fact", b"\x00" * 4)]))
    clip = read_wav(path)
    np.testing.assert_array_equal(clip.samples, ints / 32768.0)


def test_zero_roundtrip_exact(tmp_path):
    clip = AudioClip(np.zeros(16000), 16000, "z")
    write_wav(clip, tmp_path / "z.wav")
    back = read_wav(tmp_path / "z.wav")
    np.testing.assert_array_equal(back.samples, clip.samples)


def test_full_scale_saturates_to_32767(tmp_path):
    clip = AudioClip(np.array([1.0, -1.0]), 16000, "s")
    write_wav(clip, tmp_path / "s.wav")
    back = read_wav(tmp_path / "s.wav")
    assert back.samples[0] == 32767 / 32768
    assert back.samples[1] == -1.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
                min_size=1, max_size=400))
def test_roundtrip_within_one_lsb(tmp_path_factory, values):
    clip = AudioClip(np.array(values), 16000, "rt")
    path = tmp_path_factory.mktemp("wav") / "rt.wav"
    write_wav(clip, path)
    back = read_wav(path)
    assert len(back) == len(clip)
    assert np.max(np.abs(back.samples - clip.samples)) <= 1.0 / 32768


def test_clip_id_defaults_to_stem(tmp_path):
    path = tmp_path / "spk00_c01.wav"
    path.write_bytes(build_wav_bytes(np.zeros(10, dtype=np.int16)))
    assert read_wav(path).id == "spk00_c01"
    assert read_wav(path, clip_id="override").id == "override"
