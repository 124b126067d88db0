"""Shuttling-schedule compiler and verifier for CSS codes on tiled chips."""

__version__ = "0.1.0"
