"""Lexicase selection on subaggregated objectives versus MAP-Elites, on
Knight's Tour and deceptive / illumination mazes."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
