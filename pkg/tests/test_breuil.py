from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from kisinred.breuil import (
    EPoly,
    check_coeff_bounds,
    closed_form_x2,
    closed_form_z2_at0,
    filtration_recursion,
    recursion_from_module,
    verify_filtration,
    z_at_zero,
    z_at_zero_p3h3_formula,
)
from kisinred.filtmod import make_D, to_f_basis
from kisinred.padic import Cert, FieldElem
from oracle import elem, solve_x, split

rat = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def fe(p, q):
    return FieldElem(q, 0, p)


def test_epoly_E_basis_arithmetic():
    p = 5
    u = EPoly.u(p)
    assert u.at_pi() == FieldElem(0, 0, p) - FieldElem(0, 0, p) + FieldElem(-p, 0, p)
    E = EPoly([FieldElem(0, 0, p), FieldElem(1, 0, p)], p)
    assert (E * E).div_E_power(2).equals(EPoly([FieldElem(1, 0, p)], p))
    assert (E * E + EPoly([FieldElem(1, 0, p)], p)).div_E_power(1) is None
    # N(E) = -E + p
    assert E.n_op().equals(EPoly([FieldElem(p, 0, p), FieldElem(-1, 0, p)], p))


@given(st.sampled_from([3, 5, 7]), st.integers(3, 8), rat, rat, rat, rat)
def test_recursion_closed_forms(p, h, a, b, c, d):
    data = filtration_recursion(h, a, b, c, d, p)
    A, B, D = fe(p, a), fe(p, b), fe(p, d)
    pi = fe(p, -p)
    assert data.x[0] == B / pi
    assert data.x[1] == closed_form_x2(A, B, D, p)
    assert (data.z_partial[2].u_coeffs() or [fe(p, 0)])[0] == closed_form_z2_at0(A, B, D, p)
    assert verify_filtration(data).ok is Cert.TRUE


@given(st.sampled_from([3, 5]), st.integers(2, 6), rat, rat, rat, rat)
def test_recursion_matches_independent_solver(p, h, a, b, c, d):
    data = filtration_recursion(h, a, b, c, d, p)
    ref = solve_x(p, h, sp.Rational(a.numerator, a.denominator), sp.Rational(b.numerator, b.denominator),
                  sp.Rational(c.numerator, c.denominator), sp.Rational(d.numerator, d.denominator))
    assert len(ref) == len(data.x)
    for got, want in zip(data.x, ref):
        x, y = split(want, p)
        assert got == FieldElem(x, y, p)


def test_module_scalars_grid():
    for p in (3, 5, 7):
        for h in range(2, 9):
            for e in (-5, -2, 1):
                Df = to_f_basis(make_D(p, h + 1, FieldElem.w_power(e, p)))
                data = recursion_from_module(Df)
                assert verify_filtration(data, Df).ok is Cert.TRUE
                assert data.x[0] == data.b / FieldElem(-p, 0, p)


def test_verify_rejects_tampered_data():
    p, h = 5, 5
    data = filtration_recursion(h, 1, 2, 3, 4, p)
    data.z_partial[3] = data.z_partial[3] + EPoly([FieldElem(0, 0, p), FieldElem(1, 0, p)], p).shift(2)
    assert verify_filtration(data).ok is Cert.FALSE


def test_verify_rejects_mismatched_module():
    p, h = 5, 5
    Df = to_f_basis(make_D(p, h + 1, FieldElem.w_power(-3, p)))
    data = filtration_recursion(h, 0, 1, 0, 0, p)
    assert verify_filtration(data, Df).ok is Cert.FALSE


def test_coefficient_bounds_on_module_grid():
    for p in (3, 5, 7):
        for h in range(2, 9):
            for e in (-8, -5, -2, 0, 2):
                L = FieldElem.w_power(e, p)
                data = recursion_from_module(to_f_basis(make_D(p, h + 1, L)))
                bc = check_coeff_bounds(data, -L.valuation())
                if bc.lemma_hypotheses:
                    assert Cert.all(bc.lemma + bc.b_chain) is Cert.TRUE
                assert bc.estimate_applies == (-L.valuation() >= -1)
                assert bc.all_true() is Cert.TRUE


def test_z_at_zero_p3h3_is_half_the_closed_form():
    # the independent solver gives z(0) = -3 for L = 1/3; the closed form gives -6
    p = 3
    for L in (Fraction(1, 3), Fraction(2, 9), Fraction(-1, 27)):
        Lf = FieldElem(L, 0, p)
        data = recursion_from_module(to_f_basis(make_D(p, 4, Lf)))
        assert z_at_zero(data) * 2 == z_at_zero_p3h3_formula(Lf)
    data = recursion_from_module(to_f_basis(make_D(p, 4, FieldElem(Fraction(1, 3), 0, p))))
    assert z_at_zero(data) == FieldElem(-3, 0, p)


def test_h2_has_single_coefficient():
    data = filtration_recursion(2, 1, 3, 0, 1, 5)
    assert len(data.x) == 1
    with pytest.raises(ValueError):
        filtration_recursion(1, 1, 1, 1, 1, 5)
