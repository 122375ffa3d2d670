"""Tripartite multiphoton Jaynes-Cummings engine."""

__version__ = "0.1.0"
