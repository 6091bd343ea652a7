"""Boundary random walks on the half-line and their Brownian limits."""

__version__ = "0.1.0"
