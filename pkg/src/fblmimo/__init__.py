"""Finite-blocklength performance bounds for quasi-static Rayleigh MIMO channels."""

__version__ = "0.1.0"
