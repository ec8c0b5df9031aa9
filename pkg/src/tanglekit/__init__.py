"""Finite-truncation analysis of finitely presented infinite graphs."""

__version__ = "0.1.0"
