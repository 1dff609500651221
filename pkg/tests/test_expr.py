import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varcond.errors import DomainError, UnboundCoordinate
from varcond.expr import (
    ZERO,
    Add,
    Constant,
    JetCoord,
    Mul,
    Point,
    Sub,
    coord,
    diff_wrt_coord,
    diff_wrt_indep,
    evaluate,
    free_coordinates,
    simplify,
    sin,
    substitute,
    var,
)
from varcond.jet import JetCoordinate, JetSpec
from varcond.parser import parse_expression

SPEC1 = JetSpec(1, 1, 2)
SPEC2 = JetSpec(2, 2, 2)
U = JetCoordinate(1, (0,))
UX = JetCoordinate(1, (1,))
UXX = JetCoordinate(1, (2,))


def p1(text):
    return parse_expression(text, SPEC1)


def test_diff_wrt_coord_examples():
    assert diff_wrt_coord(p1("u_x^2"), UX) == p1("2*u_x")
    assert diff_wrt_coord(p1("u*u_x"), U) == p1("u_x")
    assert diff_wrt_coord(p1("sin(u)"), UX) == ZERO


def test_diff_wrt_indep_examples():
    assert diff_wrt_indep(p1("x*u"), 1) == p1("u")
    assert diff_wrt_indep(p1("u_x"), 1) == ZERO
    e = parse_expression("sin(x2)", SPEC2)
    assert diff_wrt_indep(e, 2) == parse_expression("cos(x2)", SPEC2)


def test_substitute_examples():
    assert substitute(p1("u_x^2"), {UX: var(1)}) == p1("x^2")
    assert substitute(p1("u + u_x"), {U: Constant(0)}) == p1("u_x")
    assert substitute(p1("u"), {}) == p1("u")


def test_substitute_is_simultaneous():
    e = p1("u - u_x")
    swapped = substitute(e, {U: coord(UX), UX: coord(U)})
    assert swapped == p1("u_x - u")


def test_evaluate_examples():
    assert evaluate(p1("u_x^2 + u"), Point((0.0,), {U: 3.0, UX: 2.0})) == 7
    e = parse_expression("x1*x2", SPEC2)
    assert evaluate(e, Point((0.5, 4.0), {})) == 2
    with pytest.raises(DomainError):
        evaluate(p1("1/u"), Point((0.0,), {U: 0.0}))


@pytest.mark.parametrize(
    "text, jet",
    [("log(u)", {U: 0.0}), ("log(u)", {U: -1.0}), ("sqrt(u)", {U: -1e-300}), ("u^(-2)", {U: 0.0}), ("exp(u)", {U: 1e6})],
)
def test_evaluate_domain_errors(text, jet):
    with pytest.raises(DomainError):
        evaluate(p1(text), Point((0.0,), jet))


def test_evaluate_unbound():
    with pytest.raises(UnboundCoordinate):
        evaluate(p1("u + u_x"), Point((0.0,), {U: 1.0}))


def test_simplify_examples():
    raw = Add(Mul(Constant(0), JetCoord(UXX)), Mul(Constant(1), JetCoord(U)))
    assert simplify(raw) == JetCoord(U)
    assert simplify(Sub(JetCoord(UX), JetCoord(UX))) == ZERO
    assert simplify(Mul(Constant(2), Constant(3))) == Constant(6)


def test_constructors_fold_constants():
    assert p1("2*3 + 1") == Constant(7)
    assert p1("2*(3*u)") == p1("6*u")
    assert p1("-(-u)") == p1("u")
    assert p1("(u^2)^3") == p1("u^6")


def test_free_coordinates_examples():
    assert free_coordinates(p1("u_x^2 + u")) == {U, UX}
    assert free_coordinates(p1("x^2")) == frozenset()
    e = parse_expression("u1_x1x2 * u2", SPEC2)
    assert free_coordinates(e) == {JetCoordinate(1, (1, 1)), JetCoordinate(2, (0, 0))}


def test_expressions_are_immutable_and_hashable():
    e = p1("u + 1")
    with pytest.raises(AttributeError):
        e.left = Constant(3)
    assert len({p1("u*u_x"), p1("u*u_x"), p1("u_x*u")}) == 2


def test_str_round_trips():
    for text in ["-u^2", "(-u)^3", "u/(u_x/u_xx)", "u - (u_x - u_xx)", "2^(-1)*u", "sin(-u)*cos(u_x)", "1.5e-07*u"]:
        e = p1(text)
        assert p1(str(e)) == e


# -- property tests ------------------------------------------------------------

SPEC_P = JetSpec(2, 1, 1)
LEAF_COORDS = [JetCoordinate(1, (0, 0)), JetCoordinate(1, (1, 0)), JetCoordinate(1, (0, 1))]


def _leaves():
    return st.one_of(
        st.integers(-3, 3).map(Constant),
        st.sampled_from([var(1), var(2)]),
        st.sampled_from([coord(c) for c in LEAF_COORDS]),
    )


def _extend(children):
    # every construction is total on the reals
    return st.one_of(
        st.tuples(children, children).map(lambda t: Add(*t)),
        st.tuples(children, children).map(lambda t: Sub(*t)),
        st.tuples(children, children).map(lambda t: Mul(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: t[0] ** t[1]),
        children.map(lambda c: sin(c)),
        children.map(lambda c: parse_expression("cos(u)", SPEC_P) * c),
        children.map(lambda c: 1 / (1 + c * c)),
        children.map(lambda c: parse_expression("sqrt(1 + u_x1^2)", SPEC_P) * c),
        children.map(lambda c: parse_expression("exp(sin(u_x2))", SPEC_P) + c),
        children.map(lambda c: parse_expression("log(2 + sin(x1))", SPEC_P) * c),
    )


expressions = st.recursive(_leaves(), _extend, max_leaves=10)
points = st.lists(st.floats(-1.0, 1.0), min_size=5, max_size=5)


def _point(vals):
    return Point(tuple(vals[:2]), dict(zip(LEAF_COORDS, vals[2:])))


@settings(max_examples=150, deadline=None)
@given(expressions, points)
def test_simplify_preserves_value(e, vals):
    p = _point(vals)
    a = evaluate(e, p)
    b = evaluate(simplify(e), p)
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(expressions, st.sampled_from(LEAF_COORDS), st.sampled_from(LEAF_COORDS), points)
def test_mixed_partials_commute(e, a, b, vals):
    p = _point(vals)
    ab = evaluate(diff_wrt_coord(diff_wrt_coord(e, a), b), p)
    ba = evaluate(diff_wrt_coord(diff_wrt_coord(e, b), a), p)
    assert ab == pytest.approx(ba, rel=1e-10, abs=1e-10)


@settings(max_examples=150, deadline=None)
@given(expressions, st.sampled_from(LEAF_COORDS), points)
def test_diff_matches_central_difference(e, c, vals):
    p = _point(vals)
    h = 1e-6
    up = dict(p.jet)
    dn = dict(p.jet)
    up[c] += h
    dn[c] -= h
    fd = (evaluate(e, Point(p.indep, up)) - evaluate(e, Point(p.indep, dn))) / (2 * h)
    exact = evaluate(diff_wrt_coord(e, c), p)
    assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact), abs(evaluate(e, p)))


@settings(max_examples=100, deadline=None)
@given(expressions, expressions, points)
def test_substitute_then_evaluate_composes(e, g, vals):
    p = _point(vals)
    c = LEAF_COORDS[1]
    composed = dict(p.jet)
    composed[c] = evaluate(g, p)
    assert evaluate(substitute(e, {c: g}), p) == pytest.approx(evaluate(e, Point(p.indep, composed)), rel=1e-10, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(expressions, points)
def test_print_parse_round_trip(e, vals):
    p = _point(vals)
    again = parse_expression(str(e), SPEC_P)
    assert evaluate(again, p) == pytest.approx(evaluate(e, p), rel=1e-12, abs=1e-12)


def test_compiled_evaluation_matches_math(rng):
    e = p1("exp(u)*sin(u_x) - u_xx^3/(1 + u^2)")
    for _ in range(20):
        u, ux, uxx = rng.uniform(-2, 2, 3)
        want = math.exp(u) * math.sin(ux) - uxx**3 / (1 + u * u)
        got = evaluate(e, Point((0.0,), {U: u, UX: ux, UXX: uxx}))
        assert got == pytest.approx(want, rel=1e-13)
    assert np.isfinite(got)
