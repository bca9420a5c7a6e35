"""Shared fixtures and independent oracles (sympy) for the test suite."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import strategies as st

from goodpair.matrices.symbolic import SymbolicMatrix
from goodpair.poly import LinearForm, Poly

M37_ROWS = [
    ["z1", "z2", "z3", "-z3"],
    ["z2", "-z1", "z3", "z3"],
    ["z3", "z3", "z1", "z2"],
    ["-z3", "z3", "z2", "-z1"],
]
M24_ROWS = [["z1", "z2"], ["z2", "-z1"]]


@pytest.fixture
def m37():
    return SymbolicMatrix.from_rows(3, M37_ROWS)


@pytest.fixture
def m24():
    return SymbolicMatrix.from_rows(2, M24_ROWS)


def syms(k):
    return sympy.symbols(f"z1:{k + 1}")


def to_sympy(p: Poly):
    zs = syms(p.nvars)
    expr = sympy.Integer(0)
    for mono, c in p.terms():
        term = sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
        for z, e in zip(zs, mono):
            term *= z**e
        expr += term
    return sympy.expand(expr)


def from_sympy(expr, nvars: int) -> Poly:
    zs = syms(nvars)
    sp = sympy.Poly(sympy.expand(expr), *zs)
    terms = {}
    for mono, c in sp.terms():
        terms[tuple(mono)] = Fraction(int(c.p), int(c.q))
    return Poly(nvars, terms)


def sympy_det(M: SymbolicMatrix) -> Poly:
    """Determinant through sympy's own routine (an independent route)."""
    zs = syms(M.l)
    rows = [[sum(sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) * z
                 for c, z in zip(f.coeffs, zs)) for f in row] for row in M.entries]
    if not rows:
        return Poly.constant(M.l, 1)
    return from_sympy(sympy.Matrix(rows).det(method="berkowitz"), M.l)


# --- hypothesis strategies ---------------------------------------------------------------

small_rationals = st.fractions(min_value=-4, max_value=4, max_denominator=4)


@st.composite
def polys(draw, nvars=2, max_terms=5, max_deg=3):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        mono = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        terms[mono] = draw(small_rationals)
    return Poly(nvars, terms)


@st.composite
def forms(draw, nvars=2, degree=2, max_terms=5):
    """Homogeneous forms of a fixed degree."""
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        cuts = sorted(draw(st.integers(0, degree)) for _ in range(nvars - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [degree])]
        terms[tuple(parts)] = draw(st.integers(-5, 5))
    return Poly(nvars, terms)


ALPHABET_CODES = st.integers(0, 6)


@st.composite
def alphabet_matrices(draw, l=3, size=4):
    upper = []
    for _ in range(size * (size + 1) // 2):
        v = draw(st.integers(0, l))
        if v == 0:
            upper.append(LinearForm.zero(l))
        else:
            upper.append(LinearForm.unit(l, v - 1, draw(st.sampled_from([1, -1]))))
    return SymbolicMatrix.from_upper(l, size, upper)


@st.composite
def independent_forms(draw, l=3):
    while True:
        rows = [[draw(st.integers(-3, 3)) for _ in range(l)] for _ in range(l)]
        if sympy.Matrix(rows).det() != 0:
            return [LinearForm(r) for r in rows]


# acceptance criteria report -------------------------------------------------------------

ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
