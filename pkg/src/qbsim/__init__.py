"""Switchable coherent-state cavity quantum battery simulator."""

__version__ = "0.1.0"
