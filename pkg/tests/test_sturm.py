from fractions import Fraction

import sympy
from hypothesis import given
from hypothesis import strategies as st

from goodpair import sturm


def from_roots(roots, lead=1):
    p = [Fraction(lead)]
    for r in roots:
        # multiply by (t - r)
        q = [Fraction(0)] * (len(p) + 1)
        for i, c in enumerate(p):
            q[i + 1] += c
            q[i] -= r * c
        p = q
    return p


def test_counts_distinct_roots_with_multiplicity():
    p = from_roots([1, 1, 2, -3])
    assert sturm.count_roots(sturm.sturm_chain(p)) == 3


def test_count_on_half_open_interval():
    chain = sturm.sturm_chain(from_roots([0, 1, 2]))
    assert sturm.count_roots(chain, Fraction(0), Fraction(2)) == 2  # (0, 2] holds 1 and 2
    assert sturm.count_roots(chain, Fraction(-1), Fraction(0)) == 1


def test_no_real_roots():
    assert sturm.count_roots(sturm.sturm_chain([1, 0, 1])) == 0
    assert sturm.isolate_roots([1, 0, 1]) == []


def test_isolation_of_irrational_roots():
    # t^2 - 2
    ivs = sturm.isolate_roots([-2, 0, 1])
    assert len(ivs) == 2
    for a, b in ivs:
        assert sturm.count_roots(sturm.sturm_chain([-2, 0, 1]), a, b) == 1


def test_rational_roots():
    assert sturm.rational_roots(from_roots([Fraction(1, 2), -3], lead=4)) == [-3, Fraction(1, 2)]
    assert sturm.rational_roots([-2, 0, 1]) == []


def test_gcd_and_squarefree():
    p = from_roots([1, 1, 2])
    assert sturm.squarefree_part(p) == from_roots([1, 2])
    assert sturm.gcd_poly(p, sturm.derivative(p)) == from_roots([1])


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.integers(-3, 3).filter(bool))
def test_root_count_matches_sympy(roots, lead):
    p = from_roots([Fraction(r) for r in roots], lead)
    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * t**i for i, c in enumerate(p))
    assert sturm.count_roots(sturm.sturm_chain(p)) == len(set(sympy.real_roots(sympy.Poly(expr, t))))


@given(st.lists(st.integers(-6, 6), min_size=2, max_size=7))
def test_isolating_intervals_are_disjoint_and_complete(coeffs):
    p = sturm.trim([Fraction(c) for c in coeffs])
    if len(p) < 2:
        return
    chain = sturm.sturm_chain(p)
    ivs = sturm.isolate_roots(p)
    assert len(ivs) == sturm.count_roots(chain)
    for (a, b), (c, d) in zip(ivs, ivs[1:]):
        assert b <= c
    for a, b in ivs:
        assert sturm.count_roots(chain, a, b) == 1
