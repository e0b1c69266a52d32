"""Exact counting, sampling and logic tools for graphs that split into l parts of bounded own-part degree."""

__version__ = "0.1.0"
