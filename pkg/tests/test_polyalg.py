from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dworkcoh.polyalg import (HomoPoly, ParseError, UnsupportedShape, dehomogenize, euler_check,
                              evaluate_param, homogenize_laurent, param_derivative, parse_homogeneous,
                              parse_laurent, partials, teichmuller_monomials)


def test_example_family_closure():
    P = parse_laurent("u + v + l*u^-1*v^-1 + 1", ["u", "v"])
    F = homogenize_laurent(P)
    assert F.degree == 3
    assert F == parse_homogeneous("u^2*v + u*v^2 + u*v*w + l*w^3", ["u", "v", "w"])


def test_closure_roundtrip():
    P = parse_laurent("u + v + l*u^-1*v^-1 + 1", ["u", "v"])
    F = homogenize_laurent(P)
    assert dehomogenize(F, (1, 1)) == P


def test_inverse_pair_closure():
    F = homogenize_laurent(parse_laurent("u + u^-1"))
    assert F == parse_homogeneous("u^2 + w^2", ["u", "w"])


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_laurent("u + *v")
    assert e.value.line == 1 and e.value.col == 5


def test_parse_error_bad_char():
    with pytest.raises(ParseError) as e:
        parse_laurent("u + v$", line=3)
    assert (e.value.line, e.value.col) == (3, 6)


def test_not_homogeneous():
    with pytest.raises(ParseError):
        parse_homogeneous("x^2 + y")


def test_unknown_variable():
    with pytest.raises(ParseError):
        parse_laurent("u + q", ["u", "v"])


def test_clash_with_new_variable():
    with pytest.raises(UnsupportedShape):
        homogenize_laurent(parse_laurent("w + w^-1"))


def test_partials_of_cubic():
    f = parse_homogeneous("x^3 + y^3 + z^3 + x*y*z")
    dx = partials(f)[0]
    assert dx == parse_homogeneous("3*x^2 + y*z", ["x", "y", "z"])


def test_param_derivative_and_evaluation():
    f = parse_homogeneous("u^2*v + u*v^2 + u*v*w + l*w^3", ["u", "v", "w"])
    assert param_derivative(f, log=True).terms == {(0, 0, 3): {1: Fraction(1)}}
    assert param_derivative(f).terms == {(0, 0, 3): {0: Fraction(1)}}
    g = evaluate_param(f, Fraction(1, 5))
    assert not g.has_parameter()
    assert g.constant_terms()[(0, 0, 3)] == Fraction(1, 5)


def test_teichmuller_monomials_rejects_two():
    f = parse_homogeneous("2*x^3 + y^3 + z^3")
    with pytest.raises(ValueError):
        teichmuller_monomials(f)


def test_inhomogeneous_homopoly_rejected():
    with pytest.raises(ValueError):
        HomoPoly(("x", "y"), 2, {(1, 0): {0: 1}})


exps3 = st.tuples(st.integers(0, 4), st.integers(0, 4)).map(lambda e: (e[0], e[1], 4 - e[0] - e[1]))


@given(st.dictionaries(exps3.filter(lambda e: e[2] >= 0), st.fractions(max_denominator=9).filter(bool),
                       min_size=1, max_size=8))
def test_euler_relation(terms):
    f = HomoPoly(("x", "y", "z"), 4, {e: {0: c} for e, c in terms.items()})
    assert euler_check(f)


@given(st.dictionaries(st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
                       st.integers(-5, 5).filter(bool), min_size=1, max_size=6))
def test_parse_print_roundtrip(terms):
    from dworkcoh.polyalg import LaurentPoly
    P = LaurentPoly(("u", "v"), {e: {0: Fraction(c)} for e, c in terms.items()})
    assert parse_laurent(str(P), ["u", "v"]) == P
