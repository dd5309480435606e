"""Numerical toolkit for power-weighted Orlicz classes."""

__version__ = "0.1.0"
