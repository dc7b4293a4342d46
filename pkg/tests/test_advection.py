import numpy as np
import pytest

from activeflux.advection import (
    PiecewiseField,
    characteristic_foot,
    evolve_advective_point,
    foot_point,
    local_error_order_probe,
)
from activeflux.polynomial import biparabolic_coeffs

DTS = (0.1, 0.05, 0.025)


def sampled_field(fn, nx=8, ny=8, x0=0.0, y0=0.0, dx=0.25, dy=0.25):
    """Cellwise biparabolic interpolant of ``fn(x, y) -> (nvar, ...)``."""
    xc = x0 + (np.arange(nx) + 0.5) * dx
    yc = y0 + (np.arange(ny) + 0.5) * dy
    off = np.array([-0.5, 0.0, 0.5])
    X = xc[None, None, :, None] + off[:, None, None, None] * dx
    Y = yc[None, None, None, :] + off[None, :, None, None] * dy
    X, Y = np.broadcast_arrays(X, Y)
    samples = np.asarray(fn(X, Y), dtype=float)
    coeffs = np.stack([biparabolic_coeffs(s) for s in samples])
    return PiecewiseField(coeffs, x0, y0, dx, dy)


def test_constant_velocity_foot():
    vel = lambda x, y: (np.ones_like(x), np.ones_like(y))  # noqa: E731
    for order in (2, 3):
        xf, yf, _ = characteristic_foot(np.array(0.7), np.array(-0.2), vel, 0.2, order)
        assert (float(xf), float(yf)) == pytest.approx((0.5, -0.4), abs=1e-15)


def test_zero_velocity_foot():
    vel = lambda x, y: (0.0 * x, 0.0 * y)  # noqa: E731
    xf, yf, _ = characteristic_foot(np.array(0.3), np.array(0.4), vel, 0.5)
    assert (float(xf), float(yf)) == (0.3, 0.4)


def test_burgers_like_foot():
    vel = lambda x, y: (x, 0.0 * y)  # noqa: E731
    x = np.array(0.8)
    for t in DTS:
        xf, _, _ = characteristic_foot(x, np.array(0.0), vel, t)
        assert float(xf) == pytest.approx(0.8 * (1 - t + t * t), abs=1e-15)
        assert abs(float(xf) - 0.8 / (1 + t)) <= 2 * t**3


def test_order_probe_exponents():
    q0 = lambda x, y: x  # noqa: E731
    vel = lambda x, y: (x, 0.0 * y)  # noqa: E731
    exact = lambda t, x, y: x / (1 + t)  # noqa: E731
    k3, _ = local_error_order_probe(q0, vel, exact, np.array([0.8]), np.array([0.1]), DTS, order=3)
    k2, _ = local_error_order_probe(q0, vel, exact, np.array([0.8]), np.array([0.1]), DTS, order=2)
    assert k3 >= 2.9
    assert abs(k2 - 2.0) <= 0.2


def test_probe_constant_field_is_exact():
    k, errors = local_error_order_probe(
        lambda x, y: 0 * x + 2.0,
        lambda x, y: (0 * x + 1.0, 0 * y - 0.5),
        lambda t, x, y: 0 * x + 2.0,
        np.array([0.3]),
        np.array([0.1]),
        DTS,
    )
    assert k == float("inf") and np.all(errors == 0.0)


def test_correction_term_between_iterations():
    """The two feet differ by dt^2 (v.grad) v up to O(dt^3)."""

    def vel(x, y):
        return np.sin(x) + 0.3 * y, np.cos(y) * x

    x, y = np.array(0.4), np.array(-0.7)
    u, v = vel(x, y)
    h = 1e-6
    ux = (vel(x + h, y)[0] - vel(x - h, y)[0]) / (2 * h)
    uy = (vel(x, y + h)[0] - vel(x, y - h)[0]) / (2 * h)
    vx = (vel(x + h, y)[1] - vel(x - h, y)[1]) / (2 * h)
    vy = (vel(x, y + h)[1] - vel(x, y - h)[1]) / (2 * h)
    corr = np.array([u * ux + v * uy, u * vx + v * vy])
    residuals = []
    for dt in DTS:
        f3 = np.array(characteristic_foot(x, y, vel, dt, 3)[:2], dtype=float)
        f2 = np.array(characteristic_foot(x, y, vel, dt, 2)[:2], dtype=float)
        residuals.append(np.max(np.abs(f3 - f2 - dt * dt * corr)))
    slope = np.polyfit(np.log(DTS), np.log(residuals), 1)[0]
    assert slope >= 2.8


def test_invalid_order():
    with pytest.raises(ValueError):
        characteristic_foot(np.array(0.0), np.array(0.0), lambda x, y: (x, y), 0.1, order=4)


def test_field_interpolates_quadratics_exactly():
    fn = lambda x, y: np.stack([1 + x * x - 2 * x * y, 0 * x + 1.0, 0 * x])  # noqa: E731
    field = sampled_field(fn)
    rng = np.random.default_rng(0)
    px, py = rng.uniform(0.0, 2.0, (2, 50))
    assert np.allclose(field(px, py), fn(px, py), atol=1e-13)


def test_linear_density_advected_exactly():
    fn = lambda x, y: np.stack([1 + 0.5 * x + 0.25 * y, 0 * x + 1.0, 0 * x, 0 * x + 1.0])  # noqa: E731
    field = sampled_field(fn)
    x, y = np.array([0.9, 1.3]), np.array([0.6, 1.1])
    out = evolve_advective_point(x, y, field, 0.25)
    assert np.allclose(out[0], 1 + 0.5 * (x - 0.25) + 0.25 * y, atol=1e-14)
    assert np.allclose(out[1:], fn(x, y)[1:], atol=1e-14)


def test_uniform_state_unchanged():
    fn = lambda x, y: np.stack([0 * x + 1.0, 0 * x + 0.3, 0 * x - 0.2, 0 * x + 2.0])  # noqa: E731
    field = sampled_field(fn)
    out = field.advect(np.array([0.5, 1.2]), np.array([0.7, 0.8]), 0.3, -0.2, 0.1)
    assert np.allclose(out, fn(np.zeros(2), np.zeros(2)), atol=1e-15)


def test_vectorized_matches_scalar():
    fn = lambda x, y: np.stack([1 + 0.2 * np.sin(3 * x) * y, 0.5 + 0.3 * np.cos(2 * y), -0.4 + 0.2 * x, 1 + 0 * x])  # noqa: E731
    field = sampled_field(fn)
    rng = np.random.default_rng(5)
    x, y = rng.uniform(0.5, 1.5, (2, 20))
    u0, v0 = field.velocity(x, y)
    for order in (2, 3):
        batch = field.advect(x, y, u0, v0, 0.1, order)
        for k in range(x.size):
            ref = evolve_advective_point(x[k], y[k], field, 0.1, order, v_dof=(u0[k], v0[k]))
            assert np.array_equal(batch[:, k], ref)
    with pytest.raises(ValueError):
        field.advect(x, y, u0, v0, 0.1, order=1)


def test_face_tie_goes_upwind():
    field = sampled_field(lambda x, y: np.stack([x, 0 * x + 1.0, 0 * x]), nx=4, ny=4, dx=1.0, dy=1.0)
    assert field.locate(2.0, 1.5, hint_u=1.0)[0] == 1
    assert field.locate(2.0, 1.5, hint_u=-1.0)[0] == 2
    assert field.locate(2.0, 2.0, hint_u=0.0, hint_v=1.0)[:2] == (2, 1)
    fp = foot_point(2.5, 1.5, field, 0.5)
    assert (fp.x, fp.y) == (2.0, 1.5) and fp.containing_cell == (1, 1)


def test_field_shape_validation():
    with pytest.raises(ValueError):
        PiecewiseField(np.zeros((1, 2, 3, 4, 4)))
