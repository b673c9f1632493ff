"""Numerical laboratory for solitary waves of the Benjamin equation."""

__version__ = "0.1.0"
