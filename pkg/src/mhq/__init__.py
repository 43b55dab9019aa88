"""Exact verification engine for multivariable basic hypergeometric series."""

__version__ = "0.1.0"
