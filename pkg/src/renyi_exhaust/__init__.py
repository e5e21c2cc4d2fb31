"""Rigorous spectral analysis of the iterated Renyi jamming process."""

__version__ = "0.1.0"
