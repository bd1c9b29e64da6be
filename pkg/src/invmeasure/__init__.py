"""Invariant densities and measures of one-dimensional chaotic maps.

Closed forms come from conjugacies to piecewise-linear maps and from the
derivative form of Schroeder's functional equation; an Ulam/orbit oracle and
Lyapunov exponents cross-check them numerically.
"""
from .conjugacy import conjugator, invariant_density
from .maps import FAMILIES, compactify, make_map

__version__ = "0.1.0"

__all__ = ["FAMILIES", "compactify", "conjugator", "invariant_density", "make_map", "__version__"]
