"""Command-line interface and the host platform layer."""

from .main import main

__all__ = ["main"]
