"""Render plotting scripts in a sandboxed subprocess and report element locations."""

__version__ = "0.1.0"
