"""Enumeration of covariant counterterm bases for Wick powers on curved backgrounds."""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
