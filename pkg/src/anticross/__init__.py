"""Driven two-level system with periodic anticrossings coupled to a bosonic bath."""

__version__ = "0.1.0"
