"""Finite-dimensional von Neumann algebras and concrete *-algebras."""
from .algebra import (Corner, Element, FdVnAlgebra, ceil, central_carrier, corner_subalgebra, floor,
                      polar_partial_isometry, range_projection, support_projections)
from .concrete import ConcreteStarAlgebra, Spatial, WedderburnData, commutant, wedderburn

__all__ = [
    "FdVnAlgebra", "Element", "Corner", "ceil", "floor", "support_projections", "range_projection",
    "central_carrier", "polar_partial_isometry", "corner_subalgebra",
    "ConcreteStarAlgebra", "Spatial", "WedderburnData", "commutant", "wedderburn",
]
