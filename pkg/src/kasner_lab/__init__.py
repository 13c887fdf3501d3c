"""Numerical lab for vacuum CMC Einstein flows near crushing singularities."""

__version__ = "0.1.0"
