"""Symbolic matrices, determinants, canonical forms and the good-pair search."""

from .canonical import act, canonical_form, canonical_id, canonical_key, encode, decode
from .symbolic import (
    FAILS_DIMENSION,
    FAILS_PARITY,
    PASSES,
    ObstructionReport,
    SymbolicMatrix,
    block_compose,
    build_m_prime,
    canonical_basis,
    det_symbolic,
    obstruction_check,
    repeat_blocks,
    specialize_poly,
    specialize_vars,
)

__all__ = [
    "FAILS_DIMENSION", "FAILS_PARITY", "PASSES", "ObstructionReport", "SymbolicMatrix",
    "act", "block_compose", "build_m_prime", "canonical_basis", "canonical_form",
    "canonical_id", "canonical_key", "decode", "det_symbolic", "encode",
    "obstruction_check", "repeat_blocks", "specialize_poly", "specialize_vars",
]
