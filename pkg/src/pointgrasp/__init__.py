"""Synthetic grasp dataset generation and per-point spatial grasp prediction.

Units are millimeters and grams everywhere unless a name says otherwise.
"""

__version__ = "0.1.0"

from .backend import active_backend

__all__ = ["active_backend", "__version__"]
