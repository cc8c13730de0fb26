"""Offline embedding exporter for the replay-detection pipeline."""

__version__ = "0.1.0"
