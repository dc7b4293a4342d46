import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from activeflux.acoustics import (
    DOF_KINDS,
    RESPONSES,
    AcousticOperator,
    WedgeData,
    dof_geometry,
    evolve_acoustic_point,
    precompute_dof_tables,
    response_from_p_monomial,
    response_from_u_monomial,
    response_from_v_monomial,
)
from activeflux.polynomial import Poly2
from activeflux.spherical_means import FULL_CIRCLE, TWO_PI, Wedge
from oracles import acoustic_taylor, responses_by_quadrature

# CFL 0.5 with point values half a cell apart: tau = c dt never exceeds half a cell
TAUS = (0.0, 0.05, 0.2, 0.45, 0.5)


def leading(resp):
    """Coefficients of the single power tau**(a+b) in each component."""
    return tuple(poly.coef[-1] if len(poly.coef) else 0.0 for poly in (resp.p, resp.u, resp.v))


def test_pressure_examples():
    assert response_from_p_monomial(0, 0, FULL_CIRCLE)(0.37) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)
    for tau in TAUS:
        assert response_from_p_monomial(1, 0, FULL_CIRCLE)(tau) == pytest.approx((0.0, -tau, 0.0), abs=1e-15)
        assert response_from_p_monomial(0, 1, FULL_CIRCLE)(tau) == pytest.approx((0.0, 0.0, -tau), abs=1e-15)


def test_velocity_examples():
    for tau in TAUS:
        assert response_from_u_monomial(0, 0, FULL_CIRCLE)(tau) == pytest.approx((0.0, 1.0, 0.0), abs=1e-15)
        assert response_from_v_monomial(0, 0, FULL_CIRCLE)(tau) == pytest.approx((0.0, 0.0, 1.0), abs=1e-15)
        # shear u = y: divergence free, the point value at the origin stays 0
        p, u, _ = response_from_u_monomial(0, 1, FULL_CIRCLE)(tau)
        assert p == pytest.approx(0.0, abs=1e-15) and u == pytest.approx(0.0, abs=1e-15)
        assert response_from_u_monomial(1, 0, FULL_CIRCLE)(tau)[0] == pytest.approx(-tau, abs=1e-15)
        assert response_from_v_monomial(1, 0, FULL_CIRCLE)(tau)[0] == pytest.approx(0.0, abs=1e-15)


def test_quadrants_sum_to_full_circle():
    wedges, _ = dof_geometry("node")
    for var in "puv":
        for a in range(3):
            for b in range(3):
                for tau in (0.1, 0.4):
                    total = np.zeros(3)
                    for w in wedges:
                        total += w.width / TWO_PI * np.array(RESPONSES[var](a, b, w)(tau))
                    full = np.array(RESPONSES[var](a, b, FULL_CIRCLE)(tau))
                    assert np.allclose(total, full, atol=1e-13), (var, a, b)


def test_v_response_is_reflected_u_response():
    rng = np.random.default_rng(4)
    for _ in range(20):
        lo = rng.uniform(-math.pi, math.pi)
        w = Wedge(lo, lo + rng.uniform(0.1, TWO_PI))
        for a in range(3):
            for b in range(3):
                p1, u1, v1 = leading(response_from_v_monomial(a, b, w))
                p2, u2, v2 = leading(response_from_u_monomial(b, a, w.reflect()))
                assert (p1, u1, v1) == pytest.approx((p2, v2, u2), abs=1e-13)


@pytest.mark.parametrize("kind", DOF_KINDS)
def test_tables_against_quadrature_oracle(kind):
    tables = precompute_dof_tables(kind)
    worst = 0.0
    for (w, var, a, b), resp in tables.responses.items():
        wedge = tables.wedges[w]
        ref = responses_by_quadrature(var, a, b, wedge.phi_min, wedge.phi_max)
        worst = max(worst, float(np.max(np.abs(np.array(leading(resp)) - ref))))
        # a single power of tau, of degree a + b <= 4
        for poly in (resp.p, resp.u, resp.v):
            assert len(poly.coef) <= a + b + 1 <= 5
            assert np.all(poly.coef[:-1] == 0.0)
    assert worst <= 1e-8


def test_random_wedges_against_quadrature_oracle():
    rng = np.random.default_rng(9)
    for _ in range(30):
        lo = rng.uniform(-TWO_PI, TWO_PI)
        w = Wedge(lo, lo + rng.uniform(0.05, TWO_PI))
        var = "puv"[rng.integers(3)]
        a, b = rng.integers(0, 4, size=2)
        got = leading(RESPONSES[var](int(a), int(b), w))
        ref = responses_by_quadrature(var, int(a), int(b), w.phi_min, w.phi_max)
        assert np.allclose(got, ref, atol=1e-8), (var, a, b, w)


def wedge_data(kind, P, U, V):
    wedges, _ = dof_geometry(kind)
    return [WedgeData(w, Poly2(P), Poly2(U), Poly2(V)) for w in wedges]


@pytest.mark.parametrize("kind", DOF_KINDS)
def test_linear_data_exact(kind):
    rng = np.random.default_rng(5)
    for _ in range(10):
        rho0, c0 = rng.uniform(0.5, 2.0, size=2)
        p0, px, py, u0, ux, uy, v0, vx, vy = rng.normal(size=9)
        z = rho0 * c0
        wd = wedge_data(kind, np.array([[p0, py], [px, 0]]) / z, [[u0, uy], [ux, 0]], [[v0, vy], [vx, 0]])
        for tau in TAUS:
            dt = tau / c0
            p, u, v, drho = evolve_acoustic_point(wd, rho0, c0, dt)
            assert p == pytest.approx(p0 - tau * z * (ux + vy), abs=1e-12)
            assert u == pytest.approx(u0 - tau * px / z, abs=1e-12)
            assert v == pytest.approx(v0 - tau * py / z, abs=1e-12)
            assert drho == pytest.approx((p - p0) / c0**2, abs=1e-12)


def test_linear_example():
    wd = wedge_data("node", [[0.0], [1.0]], [[0.0]], [[0.0]])
    p, u, v, drho = evolve_acoustic_point(wd, 1.0, 1.0, 0.1)
    assert u == pytest.approx(-0.1, abs=1e-15)
    assert p == pytest.approx(0.0, abs=1e-15) and v == pytest.approx(0.0, abs=1e-15)
    assert drho == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kind", DOF_KINDS)
def test_biparabolic_data_against_taylor_series(kind):
    rng = np.random.default_rng(2)
    for _ in range(3):
        P, U, V = (rng.normal(size=(3, 3)) for _ in range(3))
        wd = wedge_data(kind, P, U, V)
        for tau in (0.2, 0.45):
            ref = acoustic_taylor(P, U, V, tau)
            got = evolve_acoustic_point(wd, 1.0, 1.0, tau)[:3]
            assert np.allclose(got, ref, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
    st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 0.5),
    st.sampled_from(DOF_KINDS),
)
def test_stationary_linear_data(p0, u0, v0, s, rho0, c0, tau, kind):
    # grad p = 0 and div v = 0: a strain plus a rotation
    U = [[u0, 0.7 * s], [s, 0.0]]
    V = [[v0, -s], [-0.3 * s, 0.0]]
    wd = wedge_data(kind, [[p0 / (rho0 * c0)]], U, V)
    p, u, v, drho = evolve_acoustic_point(wd, rho0, c0, tau / c0)
    assert abs(p - p0) <= 1e-13 * max(1.0, abs(p0))
    assert abs(u - u0) <= 1e-13 and abs(v - v0) <= 1e-13
    assert abs(drho) <= 1e-13 * max(1.0, abs(p0)) / c0**2


def test_gresho_like_rotation_is_stationary():
    wd = wedge_data("node", [[0.8]], [[0.0, -1.0]], [[0.0], [1.0]])
    for tau in TAUS:
        assert evolve_acoustic_point(wd, 1.0, 1.0, tau)[:3] == pytest.approx((0.8, 0.0, 0.0), abs=1e-15)


def test_uniform_state_unchanged():
    for kind in DOF_KINDS:
        wd = wedge_data(kind, [[1.0 / 1.2]], [[0.3]], [[-0.4]])
        p, u, v, drho = evolve_acoustic_point(wd, 1.0, 1.2, 0.3)
        assert (p, u, v) == pytest.approx((1.0, 0.3, -0.4), abs=1e-15)
        assert drho == pytest.approx(0.0, abs=1e-15)


def test_identical_wedges_equal_full_circle():
    rng = np.random.default_rng(8)
    P, U, V = (rng.normal(size=(3, 3)) for _ in range(3))
    whole = [WedgeData(FULL_CIRCLE, Poly2(P), Poly2(U), Poly2(V))]
    for kind in DOF_KINDS:
        parts = wedge_data(kind, P, U, V)
        for tau in TAUS:
            assert np.allclose(evolve_acoustic_point(parts, 1.1, 0.9, tau), evolve_acoustic_point(whole, 1.1, 0.9, tau), atol=1e-12)


def test_zero_time_returns_point_value():
    rng = np.random.default_rng(3)
    P, U, V = (rng.normal(size=(3, 3)) for _ in range(3))
    p, u, v, drho = evolve_acoustic_point(wedge_data("node", P, U, V), 1.3, 0.7, 0.0)
    assert (p, u, v) == pytest.approx((P[0, 0] * 1.3 * 0.7, U[0, 0], V[0, 0]), rel=1e-14, abs=1e-15)
    assert drho == pytest.approx(0.0, abs=1e-14)


def test_invalid_inputs():
    wd = wedge_data("node", [[1.0]], [[0.0]], [[0.0]])
    with pytest.raises(ValueError):
        evolve_acoustic_point(wd, -1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        evolve_acoustic_point(wd, 1.0, 1.0, -0.1)
    nan = wedge_data("node", [[math.nan]], [[0.0]], [[0.0]])
    assert all(math.isnan(x) for x in evolve_acoustic_point(nan, 1.0, 1.0, 0.1))
    with pytest.raises(ValueError):
        precompute_dof_tables("face")


@pytest.mark.parametrize("kind", DOF_KINDS)
@pytest.mark.parametrize("dx, dy", [(1.0, 1.0), (0.1, 0.25)])
def test_grid_operator_linear_data(kind, dx, dy):
    """Tables in normalized cell coordinates reproduce the linear solution for any aspect ratio."""
    op = AcousticOperator(dx, dy)
    rng = np.random.default_rng(12)
    _, offsets = dof_geometry(kind)
    g = rng.normal(size=(3, 3))  # rows p, u, v: value, d/dx, d/dy at the dof
    rho0, c0 = 1.4, 0.9
    coeffs = np.zeros((3, 9, len(offsets)))
    for w, (ox, oy) in enumerate(offsets):
        coeffs[:, 0, w] = g[:, 0] + g[:, 1] * dx * ox + g[:, 2] * dy * oy
        coeffs[:, 3, w] = g[:, 1] * dx
        coeffs[:, 1, w] = g[:, 2] * dy
    slots = np.arange(len(offsets))[:, None]
    dts = np.array([0.1, 0.3]) * dx / c0
    out = op.evolve(kind, coeffs, slots, g[:, :1], rho0, c0, dts)
    z = rho0 * c0
    for il, dt in enumerate(dts):
        tau = c0 * dt
        expect = [g[0, 0] - tau * z * (g[1, 1] + g[2, 2]), g[1, 0] - tau * g[0, 1] / z, g[2, 0] - tau * g[0, 2] / z]
        assert np.allclose(out[il, :, 0], expect, atol=1e-12)
