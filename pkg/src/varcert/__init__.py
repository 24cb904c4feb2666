"""Exact certification of rank conditions on Jacobian rings over prime fields."""

__version__ = "0.1.0"
