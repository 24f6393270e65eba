"""Semiconcavity-preserving smooth minimum of C^2 function families."""

from .errors import (
    DataError,
    DegenerateRegionError,
    DomainError,
    InvalidArgumentError,
    InvalidParameterError,
    UnsupportedModeError,
)
from .smoothing import SmoothPlus, SmootherKind, algebraic_plus, check_plus_axioms, moreau_plus
from .softmin import (
    ActiveIndexInfo,
    SoftMinEval,
    active_info,
    limit_weights,
    lse_min,
    psi_exact,
    psi_smooth,
    weights_product_form,
)
from .semiconcave import C2Function, FunctionFamily, SemiconcaveApprox

__version__ = "0.1.0"

__all__ = [
    "ActiveIndexInfo",
    "C2Function",
    "DataError",
    "DegenerateRegionError",
    "DomainError",
    "FunctionFamily",
    "InvalidArgumentError",
    "InvalidParameterError",
    "SemiconcaveApprox",
    "SmoothPlus",
    "SmootherKind",
    "SoftMinEval",
    "UnsupportedModeError",
    "active_info",
    "algebraic_plus",
    "check_plus_axioms",
    "limit_weights",
    "lse_min",
    "moreau_plus",
    "psi_exact",
    "psi_smooth",
    "weights_product_form",
]
