"""Numerical laboratory for multiplicative weights, Gowers norms and
weighted multiple ergodic averages on finite systems."""

__version__ = "0.1.0"
