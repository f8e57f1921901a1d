"""Multiscale finite elements for elliptic problems on fractal interface networks."""

__version__ = "0.1.0"
