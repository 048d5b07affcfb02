"""Paschke and Stinespring dilations, purity and extremality of CP maps between finite-dimensional von Neumann algebras."""
from . import cp_map, dilation, purity, serialize, settings, vn_algebra
from .cp_map import CpMap
from .dilation import (PaschkeDilation, StinespringDilation, mediating_isomorphism, mediating_map,
                       mediating_map_via_isometry, minimal_stinespring, paschke_dilate, verify_dilation)
from .errors import DomainError, NumericalDegeneracyError, PaschkeError, StructuralError, VerificationError
from .purity import is_ncp_extreme, is_pure, is_pure_via_dilation, is_stormer_pure
from .vn_algebra import ConcreteStarAlgebra, Element, FdVnAlgebra

__version__ = "0.1.0"

__all__ = [
    "cp_map", "dilation", "purity", "serialize", "settings", "vn_algebra",
    "FdVnAlgebra", "Element", "ConcreteStarAlgebra", "CpMap", "PaschkeDilation", "StinespringDilation",
    "paschke_dilate", "minimal_stinespring", "mediating_map", "mediating_map_via_isometry", "mediating_isomorphism",
    "verify_dilation", "is_pure", "is_pure_via_dilation", "is_stormer_pure", "is_ncp_extreme",
    "PaschkeError", "StructuralError", "DomainError", "NumericalDegeneracyError", "VerificationError",
]
