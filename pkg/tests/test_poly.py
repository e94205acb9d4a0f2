import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mopip.poly import (
    BLOCK_X,
    ContextMismatchError,
    Polynomial,
    PolynomialSyntaxError,
    UnknownVariableError,
    decision_context,
    format_polynomial,
    make_context,
    monomial_divides,
    monomial_lcm,
    monomial_mul,
    parse_polynomial,
)

C2 = decision_context(2)
C3 = decision_context(3)


def P(text, ctx=C3):
    return parse_polynomial(ctx, text)


# -- basic arithmetic ---------------------------------------------------------

def test_add_cancels_terms():
    assert P("x1 + x2") + P("x1 - x2") == P("2*x1")


def test_mul_binary_square():
    x1 = Polynomial.variable(C3, "x1")
    assert x1 * x1 - x1 == P("x1^2 - x1")


def test_distributivity_example():
    assert P("x1 + 1") * P("x1 - 1") == P("x1^2 - 1")


def test_scalar_and_rational_coefficients():
    p = Fraction(3, 2) * Polynomial.variable(C2, "x1", )
    assert p.leading_coefficient() == Fraction(3, 2)
    assert (p - p).is_zero


def test_zero_polynomial_has_no_leading_term():
    z = Polynomial.zero(C2)
    assert z.is_zero
    with pytest.raises(ValueError):
        z.leading_term()


def test_leading_term_lex_order():
    # position 0 (x1) is the greatest variable
    p = P("x2^5 + x1")
    m, c = p.leading_term()
    assert m == (1, 0, 0) and c == 1
    assert P("x1*x2 + x1").leading_monomial() == (1, 1, 0)


def test_terms_iterate_in_decreasing_order():
    p = P("x1 + x3 + x2 + 1")
    monos = [m for m, _ in p.terms()]
    assert monos == sorted(monos, reverse=True)


def test_context_mismatch_rejected():
    with pytest.raises(ContextMismatchError):
        Polynomial.variable(C2, "x1") + Polynomial.variable(C3, "x1")


def test_pow():
    p = P("x1 + 1", C2)
    assert p ** 3 == P("x1^3 + 3*x1^2 + 3*x1 + 1", C2)
    assert p ** 0 == Polynomial.constant(C2, 1)


# -- calculus and evaluation ---------------------------------------------------

def test_partial_derivative():
    p = P("x1^2*x2 - 4*x3 + 7")
    assert p.partial_derivative("x1") == P("2*x1*x2")
    assert p.partial_derivative("x3") == P("-4")
    assert p.partial_derivative("x2") == P("x1^2")


def test_derivative_unknown_variable():
    with pytest.raises(UnknownVariableError):
        P("x1").partial_derivative("z9")


def test_evaluate_partial_and_full():
    p = P("x1*x2 + x3")
    q = p.evaluate({"x1": 2})
    assert q == P("2*x2 + x3")
    full = p.evaluate({"x1": 1, "x2": Fraction(1, 2), "x3": 3})
    assert full.constant_value() == Fraction(7, 2)


def test_evaluate_to_zero():
    p = P("x1 - x2")
    assert p.evaluate({"x1": 5, "x2": 5}).is_zero


def test_univariate_view():
    name, coeffs = P("x2^2 - 5*x2 + 4").univariate_view()
    assert name == "x2"
    assert coeffs == [4, -5, 1]
    assert P("x1*x2").univariate_view() is None
    name, coeffs = Polynomial.constant(C3, 9).univariate_view()
    assert name is None and coeffs == [9]


def test_embed_appends_zero_exponents():
    big = make_context([("z1", BLOCK_X)] + [(n, BLOCK_X) for n in C2.names])
    p = parse_polynomial(C2, "x1*x2 - 3")
    q = p.embed(big)
    assert q == parse_polynomial(big, "x1*x2 - 3")
    assert q.coefficient((0, 1, 1)) == 1


# -- text form ------------------------------------------------------------------

def test_format_examples():
    assert P("x1^2 - x1").to_text() == "x1^2 - x1"
    assert format_polynomial(Polynomial.zero(C3)) == "0"
    assert P("-4/5*x1^2*x3").to_text() == "-4/5*x1^2*x3"
    assert P("3*x1 + x2 - 7").to_text() == "3*x1 + x2 - 7"


def test_parse_rejects_bad_input():
    for text, what in [
        ("x9 + 1", "unknown"),
        ("3*", "variable"),
        ("x1 ++ 2", "coefficient or variable"),
        ("", "empty"),
        ("x1 $ 2", "stray"),
    ]:
        with pytest.raises(PolynomialSyntaxError) as e:
            P(text)
        assert e.value.offset >= 0


def test_parse_accumulates_repeated_variables():
    assert P("x1*x1") == P("x1^2")
    assert P("2*x1 + 3*x1") == P("5*x1")
    assert P("x1 - x1").is_zero


# -- property tests --------------------------------------------------------------

C5 = decision_context(5)


@st.composite
def polys(draw, ctx=C5, max_terms=6, max_deg=4):
    n = len(ctx)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(
            draw(st.integers(0, max_deg)) if draw(st.booleans()) else 0
            for _ in range(n)
        )
        terms[mono] = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 9)))
    return Polynomial(ctx, terms)


@given(polys(), polys(), polys())
@settings(max_examples=200, deadline=None)
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + Polynomial.zero(C5) == p
    assert p * Polynomial.constant(C5, 1) == p
    assert (p - p).is_zero


@given(polys(), polys())
@settings(max_examples=100, deadline=None)
def test_leading_term_multiplicative(p, q):
    if p.is_zero or q.is_zero:
        assert (p * q).is_zero
        return
    mp, cp = p.leading_term()
    mq, cq = q.leading_term()
    m, c = (p * q).leading_term()
    assert m == monomial_mul(mp, mq)
    assert c == cp * cq


@given(polys(), polys(), st.lists(st.integers(-3, 3), min_size=5, max_size=5))
@settings(max_examples=100, deadline=None)
def test_evaluate_is_ring_homomorphism(p, q, vals):
    point = dict(zip(C5.names, vals))
    lhs = (p * q + p).evaluate(point).constant_value()
    rhs = (
        p.evaluate(point).constant_value() * q.evaluate(point).constant_value()
        + p.evaluate(point).constant_value()
    )
    assert lhs == rhs


@given(polys(), polys())
@settings(max_examples=100, deadline=None)
def test_product_rule(p, q):
    d = lambda f: f.partial_derivative("x3")
    assert d(p * q) == d(p) * q + p * d(q)


@given(polys())
@settings(max_examples=200, deadline=None)
def test_text_round_trip(p):
    assert parse_polynomial(C5, p.to_text()) == p


def test_monomial_helpers():
    assert monomial_mul((1, 2), (0, 3)) == (1, 5)
    assert monomial_lcm((1, 2), (2, 0)) == (2, 2)
    assert monomial_divides((1, 0), (1, 2))
    assert not monomial_divides((2, 0), (1, 2))


def test_random_add_mul_against_dense_reference():
    # cross-check sparse arithmetic against a dense grid evaluation
    rng = random.Random(7)
    for _ in range(25):
        terms1 = {
            (rng.randint(0, 2), rng.randint(0, 2)): Fraction(rng.randint(-5, 5))
            for _ in range(4)
        }
        terms2 = {
            (rng.randint(0, 2), rng.randint(0, 2)): Fraction(rng.randint(-5, 5))
            for _ in range(4)
        }
        p, q = Polynomial(C2, terms1), Polynomial(C2, terms2)
        s, m = p + q, p * q
        for a in range(-2, 3):
            for b in range(-2, 3):
                pt = {"x1": a, "x2": b}
                pv = p.evaluate(pt).constant_value()
                qv = q.evaluate(pt).constant_value()
                assert s.evaluate(pt).constant_value() == pv + qv
                assert m.evaluate(pt).constant_value() == pv * qv
