"""Numerics for the Neumann mean-field equation on flat surfaces with boundary.

Subpackages: mesh geometry, Neumann Laplacian, Green/Robin functions, the
Kirchhoff-Routh landscape and its critical-point census, exact degree tables,
projected-bubble asymptotics, and a bubbling-aware continuation solver.
"""

__version__ = "0.1.0"
