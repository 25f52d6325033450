"""Directional-antenna position location and tracking simulator."""

__version__ = "0.1.0"
