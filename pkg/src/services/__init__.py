"""
Service layer: fields, lattices, Green functions and intersection numbers
"""

from .base_field import ImagQuadField, KElem, new_field
from .cm_field import TotallyRealField, new_real_field
from .herm_lattice import HermLattice
from .green import CuspChart, GreenParams

__all__ = [
    "ImagQuadField",
    "KElem",
    "new_field",
    "TotallyRealField",
    "new_real_field",
    "HermLattice",
    "CuspChart",
    "GreenParams",
]
