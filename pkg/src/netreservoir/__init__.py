"""Weighted directed graphs as echo state network reservoirs under node deletion."""

__version__ = "0.1.0"
