"""Certified computation of mod p reductions of semi-stable representations."""

__version__ = "0.1.0"
