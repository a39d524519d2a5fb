"""Exact computations on masures: root systems, apartments, Tits preorders, glued models and the affine order."""

__version__ = "0.1.0"

from .root_system import KacMoodyMatrix, RootGeneratingSystem, WeylElement, classify_type, validate_gcm
from .apartment import HalfSpace, HalfSpaceSet, WallFamily, enclosure_cl_sharp
from .tits_order import leq, open_leq, vectorial_distance
from .masure import GluedMasure, Gluing, MasurePoint, SectorGermRef, check_axioms, intersect_apartments, saturate
from .affine_order import certify_order, compare, delta_value

__all__ = [
    "KacMoodyMatrix", "RootGeneratingSystem", "WeylElement", "classify_type", "validate_gcm",
    "HalfSpace", "HalfSpaceSet", "WallFamily", "enclosure_cl_sharp",
    "leq", "open_leq", "vectorial_distance",
    "GluedMasure", "Gluing", "MasurePoint", "SectorGermRef", "check_axioms", "intersect_apartments", "saturate",
    "certify_order", "compare", "delta_value",
]
