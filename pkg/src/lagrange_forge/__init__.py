"""Construct and verify Lagrangians under imposed symmetries."""

__version__ = "0.1.0"
