"""Polyhedral PQ capability areas of distribution grids."""

__version__ = "0.1.0"
