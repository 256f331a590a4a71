"""Pseudospectral solver for systems with the logarithmic Laplacian and drift."""

__version__ = "0.1.0"
