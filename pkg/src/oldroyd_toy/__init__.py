"""Pseudo-spectral simulator for the inviscid Oldroyd-B toy models on the 2D torus."""

__version__ = "0.1.0"
