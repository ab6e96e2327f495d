"""Pointwise tensor algebra for almost contact B-metric structures."""
from .structure import Structure, adapted_phi_basis, canonical_structure, random_structure, verify_structure

__version__ = "0.1.0"

__all__ = ["Structure", "adapted_phi_basis", "canonical_structure", "random_structure", "verify_structure"]
