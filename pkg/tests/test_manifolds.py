from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from goodpair.definiteness import INDEFINITE, NEGATIVE, POSITIVE, Budget
from goodpair.errors import ContractError, DimensionError
from goodpair.manifolds import (
    CATALOG,
    ManifoldSpec,
    QuadraticSystem,
    all_power_range,
    build_quadratic_system,
    check_condition_II,
    condition_I_gate,
    e2,
    ex1_coefficients,
    ex1_criterion,
    example_catalog,
    lambda_det,
    lambda_matrix,
    m37,
    m37_blocks,
    m_delta,
    m_delta_coefficients_symbolic,
)
from goodpair.matrices import SymbolicMatrix, build_m_prime, det_symbolic
from goodpair.poly import LinearForm, Poly, parse_poly

from conftest import alphabet_matrices, independent_forms

FAST = Budget(20000, 14, 64)


def xpoly(text, dim):
    return parse_poly(text, dim, var="x")


class TestBuild:
    def test_m37_coordinates(self, m37):
        g1, g2, g3 = build_quadratic_system(m37).coordinates()
        assert g1 == xpoly("1/2*x1^2-1/2*x2^2+1/2*x3^2-1/2*x4^2", 4)
        assert g2 == xpoly("x1*x2+x3*x4", 4)
        assert g3 == xpoly("x1*x3+x2*x3+x2*x4-x1*x4", 4)

    def test_m24_coordinates(self, m24):
        g1, g2 = build_quadratic_system(m24).coordinates()
        assert g1 == xpoly("1/2*x1^2-1/2*x2^2", 2)
        assert g2 == xpoly("x1*x2", 2)

    def test_zero_matrix(self):
        sys = build_quadratic_system(SymbolicMatrix.from_rows(2, [[0, 0], [0, 0]]))
        assert all(g.is_zero for g in sys.coordinates())
        assert lambda_matrix(sys) == SymbolicMatrix.from_rows(2, [[0, 0], [0, 0]])

    def test_dependent_forms(self, m24):
        with pytest.raises(ContractError):
            build_quadratic_system(m24, [LinearForm([1, 1]), LinearForm([2, 2])])

    def test_round_trip(self, m37):
        assert lambda_matrix(build_quadratic_system(m37)) == m37

    def test_evaluate(self):
        sys = m_delta(1).system
        assert sys.evaluate([1, 1]) == (1, 1, 1, 0)


class TestValidation:
    def test_asymmetric(self):
        with pytest.raises(ContractError):
            QuadraticSystem.from_lists([[[1, 2], [3, 1]]])

    def test_shapes(self):
        with pytest.raises(DimensionError):
            QuadraticSystem.from_lists([[[1, 0], [0, 1]], [[1]]])
        with pytest.raises(DimensionError):
            ManifoldSpec(5, 2, m_delta(1).system)

    def test_json_round_trip(self):
        spec = m37()
        again = ManifoldSpec.from_json(spec.to_json())
        assert again == spec
        assert set(spec.to_json()) == {"n", "l", "hessians", "label"}


class TestLambda:
    def test_m_delta_lambda(self):
        for d in (1, Fraction(1, 2), -2):
            L = lambda_matrix(m_delta(d).system)
            assert L == SymbolicMatrix.from_rows(
                2, [["2*z1+2*z2", f"{d}*z1"], [f"{d}*z1", "-2*z1-2*z2"]])

    def test_condition_II_verdicts(self):
        assert check_condition_II(m_delta(1).system, FAST).kind == NEGATIVE
        assert check_condition_II(m_delta(0, allow_zero=True).system, FAST).kind == INDEFINITE
        assert check_condition_II(m37().system, FAST).kind == POSITIVE
        assert check_condition_II(m_delta(Fraction(1, 2)).system, FAST).kind == NEGATIVE

    def test_m_delta_det(self):
        assert lambda_det(m_delta(1).system) == parse_poly("-5*z1^2-8*z1*z2-4*z2^2", 2)


class TestTwoByTwoCoefficients:
    @pytest.mark.parametrize("d", [2, -2, 1, -1, Fraction(1, 2), Fraction(-1, 2), 0])
    def test_coefficients(self, d):
        sys = m_delta(d, allow_zero=True).system
        a1, a2, a3 = ex1_coefficients(sys)
        assert (a1, a2, a3) == (-4 - Fraction(d) ** 2, -4, -8)
        assert ex1_criterion(sys) == (d != 0)

    def test_symbolic(self):
        a1, a2, a3 = m_delta_coefficients_symbolic()
        assert a1 == parse_poly("-z1^2-4", 1)
        assert (a2, a3) == (Poly.constant(1, -4), Poly.constant(1, -8))

    def test_delta_one_numbers(self):
        a1, a2, a3 = ex1_coefficients(m_delta(1).system)
        assert a3 * a3 == 64 and 4 * a1 * a2 == 80

    def test_equal_components(self):
        H = [[1, 2], [2, 3]]
        sys = QuadraticSystem.from_lists([H, H])
        a1, a2, a3 = ex1_coefficients(sys)
        assert a3 * a3 == 4 * a1 * a2 and not ex1_criterion(sys)

    def test_wrong_shape(self):
        with pytest.raises(ContractError):
            ex1_coefficients(m37().system)


class TestConditionI:
    def test_ranges(self):
        assert all_power_range(7, 3) == (4, 6)
        assert all_power_range(4, 2) is None
        assert all_power_range(4, 1) == (3, 4)

    def test_gate(self):
        assert condition_I_gate(7, 3, 5)
        assert not condition_I_gate(4, 2, 2)
        assert condition_I_gate(4, 1, 3)
        assert not condition_I_gate(7, 3, 6)
        with pytest.raises(ContractError):
            condition_I_gate(3, 3, 1)


class TestCatalog:
    def test_families(self):
        assert set(CATALOG) == {"m_delta", "e2", "m37", "m37_blocks"}
        dims = [(s.l, s.n) for s in example_catalog()]
        assert dims == [(2, 4), (2, 6), (3, 7), (3, 11)]

    def test_zero_delta_rejected(self):
        with pytest.raises(ContractError, match="nonzero"):
            m_delta(0)
        with pytest.raises(ContractError, match="delta_2"):
            e2((1, 0))
        with pytest.raises(ContractError):
            e2((1,))

    def test_e2_factors(self):
        spec = e2((1, 1))
        block = lambda_det(m_delta(1).system)
        assert lambda_det(spec.system) == block * block
        assert check_condition_II(spec.system, FAST).kind == POSITIVE

    def test_e2_three_blocks(self):
        spec = e2((1, 2, Fraction(1, 3)))
        assert spec.n == 8
        expect = Poly.constant(2, 1)
        for d in (1, 2, Fraction(1, 3)):
            expect = expect * lambda_det(m_delta(d).system)
        assert lambda_det(spec.system) == expect

    def test_m37_blocks(self):
        spec = m37_blocks(1)
        assert (spec.l, spec.n) == (3, 11)
        P = lambda_det(m37().system)
        assert lambda_det(spec.system) == P * P
        assert condition_I_gate(7, 3, 5)

    def test_perturbation_keeps_m37_definite(self):
        sys = m37().system.perturbed(Fraction(1, 100), seed=1)
        assert sys != m37().system
        assert check_condition_II(sys, FAST).kind == POSITIVE


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.large_base_example])
@given(alphabet_matrices(l=3, size=3), independent_forms(l=3))
def test_round_trip_substitution(M, L):
    sys = build_quadratic_system(M, L)
    assert lambda_matrix(sys) == build_m_prime(M, L)
    assert det_symbolic(lambda_matrix(sys)) == det_symbolic(M).substitute(L)


small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=6, max_size=6))
def test_coefficient_identity(v):
    H1 = [[v[0], v[1]], [v[1], v[2]]]
    H2 = [[v[3], v[4]], [v[4], v[5]]]
    sys = QuadraticSystem.from_lists([H1, H2])
    a1, a2, a3 = ex1_coefficients(sys)
    s1, s2 = Poly.variable(2, 0), Poly.variable(2, 1)
    assert lambda_det(sys) == s1 * s1 * a1 + s2 * s2 * a2 + s1 * s2 * a3
