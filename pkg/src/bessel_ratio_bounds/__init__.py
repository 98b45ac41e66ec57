"""Algebraic bounds for ratios of modified Bessel functions."""

__version__ = "0.1.0"
