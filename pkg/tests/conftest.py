"""Shared fixtures and the acceptance summary hook.

After a run that included tests/test_acceptance.py, one PASS/FAIL line is
printed per acceptance criterion so the gate can be read at a glance.
"""

import numpy as np
import pytest

from replaydet.preprocess import Segment

_acceptance_reports = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_tone_segment(freq_hz=440.0, amp=0.3, clip_id="tone", fs=16000):
    t = np.arange(16000) / fs
    return Segment(amp * np.sin(2 * np.pi * freq_hz * t), clip_id, 0)


@pytest.fixture
def tone_segment():
    return make_tone_segment()


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance_reports[report.nodeid] = report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_reports:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for nodeid in sorted(_acceptance_reports):
        report = _acceptance_reports[nodeid]
        name = nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        tw.write_line(f"{status}  {name}  ({report.duration:.1f}s)")
