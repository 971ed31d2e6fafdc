"""Numerical spectral geometry of Lorentzian wave operators."""

__version__ = "0.1.0"
