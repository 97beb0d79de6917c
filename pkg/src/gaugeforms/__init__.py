"""Characteristic forms on spaces of connections over flat tori."""

__version__ = "0.1.0"
