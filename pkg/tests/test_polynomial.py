import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from activeflux.polynomial import (
    LAGRANGE_3,
    Poly2,
    add,
    biparabolic_coeffs,
    biparabolic_coeffs_stacked,
    eval_batch,
    eval_poly,
    mul,
    scale,
    translate,
)

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
tables = st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(lambda s: arrays(float, s, elements=coef))
points = st.floats(-2, 2, allow_nan=False)


def term_by_term(p, x, y):
    return sum(c * x**a * y**b for (a, b), c in np.ndenumerate(p.coeffs))


def test_constant_and_monomial():
    assert eval_poly(Poly2.constant(1.0), 3.7, -1.1) == 1.0
    assert eval_poly(Poly2.monomial(2, 1), 2.0, 3.0) == 12.0


def test_hand_expansion():
    p = Poly2([[1.0, 0.0, 1.0], [1.0, 0.0, 0.0]])  # 1 + x + y^2
    assert eval_poly(p, 0.5, -1.0) == pytest.approx(2.5, abs=1e-15)
    assert term_by_term(p, 0.5, -1.0) == pytest.approx(2.5, abs=1e-15)


def test_arithmetic_examples():
    x, y = Poly2.monomial(1, 0), Poly2.monomial(0, 1)
    assert eval_poly(add(x, y), 1.0, 2.0) == 3.0
    z = scale(Poly2.monomial(2, 0), 0.0)
    assert not np.any(z.coeffs)
    prod = mul(x + y, x - y)
    expect = Poly2.monomial(2, 0) - Poly2.monomial(0, 2)
    rng = np.random.default_rng(0)
    for px, py in rng.uniform(-3, 3, (5, 2)):
        assert prod(px, py) == pytest.approx(expect(px, py), abs=1e-12)
    assert np.allclose(prod.coeffs, [[0, 0, -1], [0, 0, 0], [1, 0, 0]])


def test_translate_examples():
    assert np.allclose(translate(Poly2.monomial(1, 0), 1.0, 0.0).coeffs, [[1.0], [1.0]])
    assert np.allclose(translate(Poly2.constant(4.2), 0.3, -9.0).coeffs, [[4.2]])
    t = translate(Poly2.monomial(2, 1), 1.0, -2.0)
    assert t(0.0, 0.0) == pytest.approx(-2.0)
    assert t(0.0, 0.0) == pytest.approx(Poly2.monomial(2, 1)(1.0, -2.0))


def test_derivatives():
    p = Poly2([[1.0, 2.0], [3.0, 4.0]])  # 1 + 2y + 3x + 4xy
    assert np.allclose(p.diff_x().coeffs, [[3.0, 4.0]])
    assert np.allclose(p.diff_y().coeffs, [[2.0], [4.0]])


def test_immutable():
    p = Poly2.monomial(1, 1)
    with pytest.raises(ValueError):
        p.coeffs[0, 0] = 1.0


@settings(max_examples=200, deadline=None)
@given(tables, tables, points, points)
def test_add_mul_homomorphism(cp, cq, x, y):
    p, q = Poly2(cp), Poly2(cq)
    vp, vq = p(x, y), q(x, y)
    scale_ = max(1.0, abs(vp), abs(vq), abs(vp * vq), np.abs(cp).sum() * np.abs(cq).sum() * 2.0**8)
    assert abs(add(p, q)(x, y) - (vp + vq)) <= 1e-12 * scale_
    assert abs(mul(p, q)(x, y) - vp * vq) <= 1e-12 * scale_


@settings(max_examples=200, deadline=None)
@given(tables, st.floats(-2, 2), st.floats(-2, 2), points, points)
def test_translate_commutes(c, dx, dy, x, y):
    p = Poly2(c)
    size = np.abs(c).sum() * 4.0**8
    assert abs(translate(p, dx, dy)(x, y) - p(x + dx, y + dy)) <= 1e-12 * max(1.0, size)
    back = translate(translate(p, dx, dy), -dx, -dy)
    assert np.allclose(back.coeffs, p.coeffs, rtol=0, atol=1e-12 * max(1.0, size))


def test_biparabolic_interpolates():
    rng = np.random.default_rng(1)
    samples = rng.normal(size=(3, 3, 7))
    c = biparabolic_coeffs(samples)
    nodes = (-0.5, 0.0, 0.5)
    for s, xi in enumerate(nodes):
        for t, et in enumerate(nodes):
            assert np.allclose(eval_batch(c, xi, et), samples[s, t], atol=1e-13)
    stacked = biparabolic_coeffs_stacked(samples[None].repeat(2, axis=0))
    assert np.allclose(stacked[1], c, atol=1e-14)


def test_lagrange_rows_reproduce_quadratics():
    # coefficients of 1, xi, xi^2 from the samples of xi^2 at -1/2, 0, 1/2
    assert np.allclose(LAGRANGE_3 @ np.array([0.25, 0.0, 0.25]), [0.0, 0.0, 1.0])
