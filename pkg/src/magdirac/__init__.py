"""Spectral laboratory for the 2D magnetic Dirac operator."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
