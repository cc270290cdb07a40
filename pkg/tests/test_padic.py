from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kisinred.padic import (
    INF,
    Cert,
    FieldElem,
    PrecisionError,
    a_p,
    format_literal,
    parse_literal,
    vp_factorial,
    vp_int,
    vp_rational,
)

PRIMES = st.sampled_from([3, 5, 7])
rationals = st.fractions(min_value=-50, max_value=50, max_denominator=200)


def elems(p, exact=True):
    return st.builds(lambda x, y: FieldElem(x, y, p), rationals, rationals)


def test_w_squared_is_p():
    for p in (3, 5, 7):
        w = FieldElem.w_power(1, p)
        assert w * w == FieldElem(p, 0, p)
        assert w.valuation() == Fraction(1, 2)


def test_a_p_valuation():
    for p in (3, 5, 7):
        for h in range(2, 9):
            assert a_p(p, h).valuation() == Fraction(h - 1, 2)


def test_vp_helpers():
    assert vp_int(0, 3) == INF
    assert vp_int(3 ** 40 * 7, 3) == 40
    assert vp_rational(Fraction(2, 27), 3) == -3
    # Legendre: v_3(10!) = 3 + 1
    assert vp_factorial(10, 3) == 4
    assert vp_factorial(0, 5) == 0


def test_precision_propagates_through_product():
    p = 5
    a = FieldElem(1, 0, p, prec=Fraction(3))
    b = FieldElem(5, 0, p, prec=Fraction(4))
    # min(3 + v(b), 4 + v(a)) = min(4, 4)
    assert (a * b).prec == 4


def test_inverse_of_unknown_zero_raises():
    z = FieldElem(0, 0, 3, prec=Fraction(2))
    with pytest.raises(PrecisionError, match="inverse"):
        z.inverse()


def test_cert_has_no_truth_value():
    with pytest.raises(TypeError):
        bool(Cert.TRUE)
    assert Cert.all([Cert.TRUE, Cert.UNKNOWN]) is Cert.UNKNOWN
    assert Cert.all([Cert.TRUE, Cert.FALSE, Cert.UNKNOWN]) is Cert.FALSE
    assert Cert.all([]) is Cert.TRUE


def test_val_ge_is_three_valued():
    x = FieldElem(0, 0, 3, prec=Fraction(1))
    assert x.val_ge(1) is Cert.TRUE
    assert x.val_ge(2) is Cert.UNKNOWN
    assert FieldElem(1, 0, 3).val_ge(1) is Cert.FALSE


def test_parse_literal_forms():
    p = 3
    assert parse_literal("p^-2", p) == FieldElem(Fraction(1, 9), 0, p)
    assert parse_literal("p^(-1/2)", p) == FieldElem.w_power(-1, p)
    assert parse_literal("3/7*w^-5", p) == FieldElem.w_power(-5, p, Fraction(3, 7))
    assert parse_literal("1/9 + w^-3", p) == FieldElem(Fraction(1, 9), 0, p) + FieldElem.w_power(-3, p)
    assert parse_literal("-w", p) == FieldElem(0, -1, p)
    with pytest.raises(ValueError):
        parse_literal("p^1/3", p)
    with pytest.raises(ValueError):
        parse_literal("", p)


@given(PRIMES.flatmap(lambda p: st.tuples(st.just(p), elems(p))))
def test_literal_roundtrip(pe):
    p, e = pe
    assert parse_literal(format_literal(e), p) == e


@given(PRIMES.flatmap(lambda p: st.tuples(elems(p), elems(p), elems(p))))
def test_field_axioms(abc):
    a, b, c = abc
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == FieldElem(0, 0, a.p)


@given(PRIMES.flatmap(lambda p: st.tuples(elems(p), elems(p))))
def test_valuation_ultrametric_and_multiplicative(ab):
    a, b = ab
    assert (a * b).valuation() == a.valuation() + b.valuation()
    assert (a + b).valuation() >= min(a.valuation(), b.valuation())


@given(PRIMES.flatmap(lambda p: elems(p)))
def test_inverse(a):
    if a.is_zero_at_prec():
        return
    assert a * a.inverse() == FieldElem(1, 0, a.p)
    assert a.inverse().valuation() == -a.valuation()


@given(PRIMES.flatmap(lambda p: st.tuples(elems(p), st.integers(1, 6))))
def test_reduced_precision_is_consistent(ae):
    a, m = ae
    b = a.with_prec(Fraction(m, 2))
    assert b == a
    assert b.valuation() <= Fraction(m, 2)


def test_json_roundtrip():
    e = FieldElem(Fraction(2, 9), Fraction(-1, 3), 3, prec=Fraction(7, 2))
    assert FieldElem.from_json(e.to_json()) == e
    assert FieldElem.from_json(e.to_json()).prec == e.prec
