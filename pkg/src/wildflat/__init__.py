"""Finitely truncated translation surfaces and their wild singularities."""

__version__ = "0.1.0"
