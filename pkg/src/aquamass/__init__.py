"""Underwater debris detection post-processing: mask geometry, area and mass
estimation, tow feasibility, detection metrics and a reporting pipeline."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
