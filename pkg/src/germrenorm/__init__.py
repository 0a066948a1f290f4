"""Spectrally regularized Feynman amplitudes as meromorphic germs, and their renormalization."""

__version__ = "0.1.0"
