"""Segmentation count oracle and energy normalization properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replaydet.audio_io import AudioClip
from replaydet.preprocess import Segment, normalize_energy, segment, segment_keys


def brute_force_starts(n, window, hop):
    return [s for s in range(0, max(n - window + 1, 0), hop)] if hop > 0 else []


def clip_of(n, clip_id="c"):
    return AudioClip(np.arange(n, dtype=np.float64) / max(n, 1), 16000, clip_id)


def test_exact_window_single_segment():
    segs = segment(clip_of(16000))
    assert len(segs) == 1
    assert segs[0].start_sample == 0
    assert segs[0].key == "c@0"


def test_three_second_clip():
    segs = segment(clip_of(48000))
    assert [s.start_sample for s in segs] == [0, 8000, 16000, 24000, 32000]
    assert [s.start_sample for s in segs] == brute_force_starts(48000, 16000, 8000)


def test_below_window_no_segments():
    assert segment(clip_of(15999)) == []


def test_invalid_window_and_hop():
    with pytest.raises(ValueError):
        segment(clip_of(100), window=0)
    with pytest.raises(ValueError):
        segment(clip_of(100), window=10, hop=11)
    with pytest.raises(ValueError):
        segment(clip_of(100), window=10, hop=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3000), st.integers(1, 500), st.integers(1, 500))
def test_count_matches_brute_force(n, window, hop):
    if hop > window:
        hop = window
    segs = segment(clip_of(n), window=window, hop=hop)
    starts = brute_force_starts(n, window, hop)
    assert [s.start_sample for s in segs] == starts
    assert all(len(s) == window for s in segs)


def test_segment_keys_match_segments():
    clip = clip_of(50000, "abc")
    assert segment_keys(50000, "abc") == [s.key for s in segment(clip)]


def test_segments_copy_not_view():
    clip = clip_of(16000)
    seg = segment(clip)[0]
    clip.samples[0] = 99.0
    assert seg.samples[0] != 99.0


def test_sine_normalized_to_target():
    t = np.arange(16000) / 16000
    seg = Segment(0.5 * np.sin(2 * np.pi * 440 * t), "s", 0)
    in_rms = np.sqrt(np.mean(seg.samples ** 2))
    assert in_rms == pytest.approx(0.5 / np.sqrt(2), rel=1e-12)

    out, silent = normalize_energy(seg)
    assert not silent
    out_rms = np.sqrt(np.mean(out.samples ** 2))
    assert out_rms == pytest.approx(0.1, rel=1e-6)
    # closed-form scale for an amp-0.5 sine: 0.1 / (0.5/sqrt(2))
    scale = out.samples[100] / seg.samples[100]
    assert scale == pytest.approx(0.2 * np.sqrt(2), rel=1e-9)


def test_zero_segment_flagged_silent():
    seg = Segment(np.zeros(16000), "z", 0)
    out, silent = normalize_energy(seg)
    assert silent
    np.testing.assert_array_equal(out.samples, seg.samples)


def test_already_at_target_unchanged():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(16000)
    x *= 0.1 / np.sqrt(np.mean(x ** 2))
    out, _ = normalize_energy(Segment(x, "a", 0))
    assert np.max(np.abs(out.samples - x)) < 1e-9


def test_invalid_target_rms():
    with pytest.raises(ValueError):
        normalize_energy(Segment(np.ones(16000), "a", 0), target_rms=0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_idempotent_and_sign_preserving(seed):
    x = np.random.default_rng(seed).standard_normal(16000) * 0.2
    once, _ = normalize_energy(Segment(x, "p", 0))
    twice, _ = normalize_energy(once)
    assert np.max(np.abs(twice.samples - once.samples)) < 1e-9
    np.testing.assert_array_equal(np.sign(once.samples), np.sign(x))


def test_key_format():
    assert Segment(np.zeros(16000), "clipX", 24000).key == "clipX@24000"
