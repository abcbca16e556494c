"""Coordinated account group detection for tweet streams."""

__version__ = "0.1.0"
