"""Algorithms for one-relator groups, HNN extensions of free groups and GBS groups."""

__version__ = "0.1.0"
