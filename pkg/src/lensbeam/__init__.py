"""Lens-embedded mmWave antenna array simulator."""

__version__ = "0.1.0"
