"""Spectral and lattice-counting tools for L^p bounds of Laplace eigenfunctions
on hyperbolic surfaces."""

__version__ = "0.1.0"
