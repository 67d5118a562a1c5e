"""Seed-reproducible simulator of a specific-curiosity agent in gridworlds."""

__version__ = "0.1.0"
