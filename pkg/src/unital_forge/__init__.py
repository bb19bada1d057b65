"""Unitals of PG(2, q^2), Baer secants and ovoidal Buekenhout-Metz reconstruction."""

from .abb import AbbModel, build_abb
from .fields import FieldCtx, build_field, field_for_q
from .kernels import BACKEND
from .pipeline import corollary_check, reconstruct_bm, table1_advisor
from .projective import ProjectiveSpace
from .unital import (
    Unital,
    hermitian_unital,
    is_classical,
    secant_census,
    standard_bm,
    validate_unital,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AbbModel",
    "FieldCtx",
    "ProjectiveSpace",
    "Unital",
    "build_abb",
    "build_field",
    "corollary_check",
    "field_for_q",
    "hermitian_unital",
    "is_classical",
    "reconstruct_bm",
    "secant_census",
    "standard_bm",
    "table1_advisor",
    "validate_unital",
]
