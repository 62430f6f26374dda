"""Benchmark of ATT&CK technique classification from procedure descriptions."""

__version__ = "0.1.0"
