"""Numerical laboratory for 1D Schroedinger operators with single-well potentials
and the Grushin multiplier kernels built from them."""
__version__ = "0.1.0"

from . import errors, grushin, potential, schrodinger, semiclassics, verify
from .potential import PotentialSpec
from .schrodinger import EigenPair, EigenSolveConfig, eigenfunction, eigenvalue

__all__ = [
    "errors", "grushin", "potential", "schrodinger", "semiclassics", "verify",
    "PotentialSpec", "EigenPair", "EigenSolveConfig", "eigenfunction", "eigenvalue",
]
