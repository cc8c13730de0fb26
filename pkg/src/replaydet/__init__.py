"""Natural vs loudspeaker-emitted speech classification pipeline."""

__version__ = "0.1.0"
