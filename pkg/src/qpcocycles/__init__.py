"""Numerical toolkit for quasi-periodic SL(2,R) cocycles over circle rotations."""

from .cocycle import QpCocycle, Sl2Map, conjugate, degree, fibered_product, schrodinger
from .contfrac import CfExpansion, expand
from .errors import CocycleError
from .families import GOLDEN, SILVER, bounded_family, rotation_cocycle
from .invariants import fibered_rotation_number, lyapunov_exponent

__version__ = "0.1.0"

__all__ = [
    "CfExpansion", "CocycleError", "GOLDEN", "QpCocycle", "SILVER", "Sl2Map", "bounded_family",
    "conjugate", "degree", "expand", "fibered_product", "fibered_rotation_number", "lyapunov_exponent",
    "rotation_cocycle", "schrodinger",
]
