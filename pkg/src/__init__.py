"""
Unitary Kudla-Rapoport toolkit
Explicit intersection numbers, Green functions and Hermitian lattice invariants
"""

__version__ = "0.1.0"
