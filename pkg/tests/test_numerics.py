import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varcond.errors import BadBounds, NonFiniteEntry, TooManyNodes
from varcond.numerics import (
    BoxDomain,
    DefinitenessKind,
    classify_definiteness,
    integrate_box,
    symmetric_eigenvalues,
)


def test_quadrature_examples():
    unit2 = BoxDomain(((0, 1), (0, 1)))
    assert integrate_box(lambda x: x[0] * x[1], unit2, 2) == pytest.approx(0.25, abs=1e-15)
    assert integrate_box(lambda x: x[0] ** 3, BoxDomain(((0, 1),)), 2) == pytest.approx(0.25, abs=1e-15)
    assert integrate_box(lambda x: math.sin(x[0]), BoxDomain(((0, math.pi),)), 16) == pytest.approx(2, abs=1e-10)


def test_quadrature_vectorized_and_threaded_agree():
    dom = BoxDomain(((0, 2), (-1, 1), (0, 0.5)))

    def f(x):
        return math.exp(x[0]) * math.cos(x[1]) + x[2] ** 5

    a = integrate_box(f, dom, 6)
    b = integrate_box(f, dom, 6, workers=4)
    c = integrate_box(lambda xs: np.exp(xs[:, 0]) * np.cos(xs[:, 1]) + xs[:, 2] ** 5, dom, 6, vectorized=True)
    assert a == b
    assert c == pytest.approx(a, rel=1e-14)


def test_quadrature_guards():
    with pytest.raises(TooManyNodes):
        integrate_box(lambda x: 1.0, BoxDomain(((0, 1),) * 6), 20)
    with pytest.raises(ValueError):
        integrate_box(lambda x: 1.0, BoxDomain(((0, 1),)), 1)
    with pytest.raises(BadBounds):
        BoxDomain(((1, 0),))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_quadrature_exact_on_polynomials(nodes, n, seed):
    rng = np.random.default_rng(seed)
    deg = 2 * nodes - 1
    coeffs = rng.uniform(-1, 1, (n, deg + 1))
    bounds = [tuple(sorted(rng.uniform(-2, 2, 2))) for _ in range(n)]
    dom = BoxDomain(tuple(bounds))

    def f(x):
        return math.prod(np.polyval(coeffs[i], x[i]) for i in range(n))

    exact = 1.0
    for i, (a, b) in enumerate(bounds):
        anti = np.polyint(coeffs[i])
        exact *= np.polyval(anti, b) - np.polyval(anti, a)
    got = integrate_box(f, dom, nodes)
    assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact)) + 1e-13


@pytest.mark.parametrize(
    "m, want",
    [([[2, 0], [0, 2]], [2, 2]), ([[0, 1], [1, 0]], [-1, 1]), ([[2, 1], [1, 2]], [1, 3])],
)
def test_eigen_examples(m, want):
    np.testing.assert_allclose(symmetric_eigenvalues(m), want, atol=1e-14)


def test_eigen_non_finite():
    with pytest.raises(NonFiniteEntry):
        symmetric_eigenvalues([[1, np.nan], [np.nan, 1]])


@pytest.mark.parametrize("size", [2, 3])
def test_eigen_matches_characteristic_roots(size, rng):
    for _ in range(50):
        b = rng.uniform(-3, 3, (size, size))
        m = b + b.T
        if size == 2:
            tr = m[0, 0] + m[1, 1]
            det = m[0, 0] * m[1, 1] - m[0, 1] ** 2
            disc = math.sqrt(tr * tr / 4 - det)
            roots = [tr / 2 - disc, tr / 2 + disc]
        else:
            roots = np.sort(np.roots(np.poly(m)).real)
        np.testing.assert_allclose(symmetric_eigenvalues(m), roots, atol=1e-9)


@pytest.mark.parametrize("size", [1, 4, 7, 12])
def test_eigen_trace_and_determinant(size, rng):
    for _ in range(10):
        b = rng.uniform(-1, 1, (size, size))
        m = b + b.T
        lam = symmetric_eigenvalues(m)
        assert lam.sum() == pytest.approx(np.trace(m), rel=1e-8, abs=1e-12)
        assert np.prod(lam) == pytest.approx(np.linalg.det(m), rel=1e-8, abs=1e-12)
        assert np.all(np.diff(lam) >= 0)


def test_eigen_of_zero_and_diagonal():
    np.testing.assert_array_equal(symmetric_eigenvalues(np.zeros((3, 3))), [0, 0, 0])
    np.testing.assert_array_equal(symmetric_eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1, 2, 3])


@pytest.mark.parametrize(
    "m, kind",
    [
        ([[2, 0], [0, 2]], DefinitenessKind.POSITIVE_DEFINITE),
        ([[0, 0], [0, 2]], DefinitenessKind.POSITIVE_SEMIDEFINITE),
        ([[-2, 0], [0, 2]], DefinitenessKind.INDEFINITE),
        ([[-2, 0], [0, -1]], DefinitenessKind.NEGATIVE_DEFINITE),
        ([[-2, 0], [0, 0]], DefinitenessKind.NEGATIVE_SEMIDEFINITE),
        ([[0, 0], [0, 0]], DefinitenessKind.ZERO),
        ([[1e-12, 0], [0, -1e-12]], DefinitenessKind.ZERO),
    ],
)
def test_classify_definiteness(m, kind):
    d = classify_definiteness(m, 1e-9)
    assert d.kind is kind
    assert d.lambda_min <= d.lambda_max


@pytest.mark.parametrize("m", [[[4.0, 1.0], [1.0, 2.0]], [[1.0, 3.0], [3.0, 1.0]], [[-5.0, 0.0], [0.0, -0.5]]])
def test_classification_is_scale_free(m):
    # threshold is relative to ||M||_F once ||M||_F > 1
    m = np.array(m)
    kinds = {classify_definiteness(c * m, 1e-9).kind for c in (1.0, 1e3, 1e6)}
    assert len(kinds) == 1


def test_midpoint_grid():
    dom = BoxDomain(((0, 1), (2, 4)))
    g = dom.midpoint_grid((2, 1))
    np.testing.assert_allclose(g, [[0.25, 3.0], [0.75, 3.0]])
