"""Exact tools for good pairs: symbolic determinants, definiteness certificates,
matrix search, quadratic manifolds and power-law convergence checks."""

from .definiteness import DEFAULT_BUDGET, Budget, Verdict, decide
from .errors import ContractError, DimensionError, GoodPairError, PreconditionError
from .poly import LinearForm, Poly, parse_poly

__version__ = "0.1.0"

__all__ = [
    "Budget", "ContractError", "DEFAULT_BUDGET", "DimensionError", "GoodPairError",
    "LinearForm", "Poly", "PreconditionError", "Verdict", "decide", "parse_poly",
]
