"""Spectral positivity analysis for the second variation of the
Wang-Yau quasi-local energy on the round unit sphere."""

__version__ = "0.1.0"
