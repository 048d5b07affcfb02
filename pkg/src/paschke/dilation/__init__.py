"""Hilbert modules, Paschke dilations, mediating maps and Stinespring dilations."""
from .mediate import mediating_isomorphism, mediating_map, mediating_map_via_isometry, mediator_residuals
from .module import HilbertModule, gns_module
from .paschke import (DilationTriple, PaschkeDilation, as_triple, conjugated, inflate, paschke_dilate, permuted,
                      verify_dilation)
from .stinespring import (StinespringDilation, conjugated_stinespring, from_kraus_stinespring, is_minimal,
                          isometry_residuals, minimal_stinespring, padded, proportionality_check,
                          stinespring_isometry)

__all__ = [
    "HilbertModule", "gns_module", "PaschkeDilation", "DilationTriple", "paschke_dilate", "verify_dilation",
    "as_triple", "inflate", "conjugated", "permuted", "mediating_map", "mediating_map_via_isometry",
    "mediating_isomorphism", "mediator_residuals", "StinespringDilation", "minimal_stinespring",
    "stinespring_isometry", "proportionality_check", "is_minimal", "padded", "conjugated_stinespring",
    "from_kraus_stinespring", "isometry_residuals",
]
