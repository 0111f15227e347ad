import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbres.polycore import (
    MultiPoly,
    PolyParseError,
    format_poly,
    is_homogeneous,
    parse_poly,
    poly_add,
    poly_diff,
    poly_eval,
    poly_mul,
    poly_substitute,
)

XYZ = ["x", "y", "z"]


def P(text, names=XYZ, param="t"):
    return parse_poly(text, names, param)


# -- arithmetic ---------------------------------------------------------------

def test_add_cancels_to_zero():
    assert poly_add(P("x"), P("-x")).is_zero


def test_add_merges_terms():
    assert poly_add(P("x + t*z"), P("x")) == P("2*x + t*z")


def test_add_cancels_mixed_term():
    assert poly_add(P("x - x*y"), P("x*y")) == P("x")


def test_mul_difference_of_squares():
    assert poly_mul(P("1 + x"), P("1 - x")) == P("1 - x^2")


def test_mul_monomials():
    assert poly_mul(P("x"), P("y")) == P("x*y")


def test_cubic_from_its_roots_relations():
    # (l - u1)(l - u2)(l - u3) with e1 = 1, e2 = 0, e3 = t is l^3 - l^2 - t
    t = 0.3
    u = np.roots([1, -1, 0, -t])
    lam = MultiPoly.variable(1, 0)
    prod = MultiPoly.constant(1, 1)
    for r in u:
        prod = prod * (lam - MultiPoly.constant(1, r))
    assert prod.allclose(parse_poly(f"l^3 - l^2 - {t}", ["l"], None), rtol=1e-12, atol=1e-12)


def test_zero_threshold_is_relative():
    # 1e-20 next to unit coefficients is float noise and is dropped on construction
    assert P("x + 1e-20*y") == P("x")
    # on its own it is a genuine coefficient
    assert P("1e-20*y").terms == {(0, 1, 0, 0): 1e-20}
    assert poly_add(P("x + y"), P("-y")) == P("x")


# -- differentiation and evaluation -------------------------------------------------

def test_diff_examples():
    assert poly_diff(P("x - x*y"), 0) == P("1 - y")
    assert poly_diff(P("x - y^2"), 1) == P("-2*y")
    assert poly_diff(P("x + t*z"), 3) == P("z")


def test_eval_examples():
    assert poly_eval(P("x + t*z"), [0, 0, 0], 0.5) == 0
    assert poly_eval(P("x - y^2"), [1, 1, 1]) == 0
    assert poly_eval(P("x - x*y + t"), [1, 1, 1], 0.0) == 0
    assert poly_eval(P("x - x*y + t"), [2, 3, 0], 0.25) == pytest.approx(-3.75)


# -- substitution ------------------------------------------------------------

def test_substitute_single_variable():
    q, e = poly_substitute(P("x"), {0: P("x")}, 2)
    assert (q, e) == (P("x"), 1)


def test_substitute_product():
    q, e = poly_substitute(P("x*y"), {0: P("x"), 1: P("y")}, 2)
    assert (q, e) == (P("x*y"), 2)


def test_substitute_without_denominator_needed():
    # z -> 1/z on a polynomial free of z: nothing to clear
    q, e = poly_substitute(P("x + y"), {2: MultiPoly.constant(3, 1)}, 2)
    assert (q, e) == (P("x + y"), 0)


# -- parsing and printing ------------------------------------------------------

def test_parse_family_component():
    p = P("x + t*z")
    assert p.terms == {(1, 0, 0, 0): 1, (0, 0, 1, 1): 1}
    assert p.has_parameter


def test_parse_rational_literal():
    assert P("3/2*x*y", ["x", "y"]).terms == {(1, 1, 0): 1.5}


def test_parse_nested_and_powers():
    assert P("(x - y)^2") == P("x^2 - 2*x*y + y^2")
    assert P("-(x + 1)") == P("-x - 1")


@pytest.mark.parametrize(
    "text, column",
    [("2x", 2), ("x +", 4), ("x ** 2", 4), ("x^y", 3), ("w", 1), ("(x", 3), ("3/0*x", 3)],
)
def test_parse_errors_carry_position(text, column):
    with pytest.raises(PolyParseError) as info:
        P(text)
    assert info.value.position + 1 >= 1
    assert "column" in str(info.value)


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(PolyParseError):
        P("x y")


def test_parameter_name_clash():
    with pytest.raises(ValueError):
        parse_poly("x", ["x", "t"], "t")


def test_format_order():
    assert format_poly(P("t + x - x*y"), XYZ) == "x - x*y + t"
    assert format_poly(P("-x^2 + 1"), XYZ) == "1 - x^2"
    assert format_poly(P("-y*z"), XYZ) == "-y*z"
    assert format_poly(MultiPoly.zero(3), XYZ) == "0"


def test_is_homogeneous():
    assert is_homogeneous(parse_poly("x0 - x2", ["x0", "x1", "x2"], None))
    assert not is_homogeneous(parse_poly("x0 - 1", ["x0"], None))


# -- properties ----------------------------------------------------------------

NV = 3
small_int = st.integers(-4, 4)
exps = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 1))
int_polys = st.dictionaries(exps, small_int.filter(bool), max_size=5).map(lambda d: MultiPoly(NV, d))
cplx = st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False)
cplx_polys = st.dictionaries(exps, cplx, max_size=5).map(lambda d: MultiPoly(NV, d))
points = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=NV, max_size=NV)


@settings(max_examples=100, deadline=None)
@given(cplx_polys, cplx_polys, cplx_polys)
def test_distributive_law(p, q, r):
    lhs = (p + q) * r
    rhs = p * r + q * r
    assert lhs.allclose(rhs, rtol=1e-12, atol=1e-12 * (1 + max(map(abs, rhs.terms.values()), default=0)))


@settings(max_examples=100, deadline=None)
@given(cplx_polys, cplx_polys, points, st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_eval_is_multiplicative(p, q, z, t):
    lhs = poly_eval(p * q, z, t)
    rhs = poly_eval(p, z, t) * poly_eval(q, z, t)
    scale = 1 + sum(abs(c) for c in p.terms.values()) * sum(abs(c) for c in q.terms.values()) * 3**6
    assert abs(lhs - rhs) <= 1e-10 * scale


@settings(max_examples=100, deadline=None)
@given(int_polys, int_polys, st.integers(0, NV))
def test_leibniz_rule_exact(p, q, i):
    assert poly_diff(p * q, i) == poly_diff(p, i) * q + p * poly_diff(q, i)


@settings(max_examples=150, deadline=None)
@given(int_polys)
def test_parse_print_round_trip_integer(p):
    assert P(format_poly(p, XYZ)) == p


@settings(max_examples=150, deadline=None)
@given(cplx_polys)
def test_parse_print_round_trip_complex(p):
    assert P(format_poly(p, XYZ)) == p
