"""Anisotropic jump-process laboratory."""

__version__ = "0.1.0"
