"""Numerical laboratory for spectral radii of matrix families and elementary operators."""

__version__ = "0.1.0"
