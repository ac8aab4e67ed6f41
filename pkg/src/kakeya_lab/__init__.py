"""Kakeya line configurations and their coverage certificates."""

__version__ = "0.1.0"
