"""Approximate evolution operator for the nonlinear advection sub-system.

All primitive variables are transported with the local velocity.  The foot of
the characteristic through ``x`` is found by one predictor step and one
re-evaluation of the velocity there, ``x - v0(x - v0(x) t) t``, which is exact
up to ``O(t**3)`` when the Jacobians are multiples of the identity.  The
plain local linearization ``x - v0(x) t`` is kept as ``order=2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class FootPoint:
    x: float
    y: float
    containing_cell: tuple


class PiecewiseField:
    """Cellwise biparabolic fields on a uniform grid.

    ``coeffs[var, a, b, i, j]`` are coefficients in the normalized coordinates
    of cell ``(i, j)``, whose lower-left corner is ``(x0 + i dx, y0 + j dy)``.
    Cells are half-open; a point exactly on a face is assigned to the cell on
    the upwind side of the hint velocity.
    """

    def __init__(self, coeffs, x0=0.0, y0=0.0, dx=1.0, dy=1.0, velocity_components=(1, 2)):
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim != 5 or self.coeffs.shape[1:3] != (3, 3):
            raise ValueError(f"expected coefficients of shape (nvar, 3, 3, nx, ny), got {self.coeffs.shape}")
        self.x0, self.y0, self.dx, self.dy = x0, y0, dx, dy
        self.velocity_components = velocity_components

    @property
    def shape(self):
        return self.coeffs.shape[3:]

    def locate(self, x, y, hint_u=0.0, hint_v=0.0):
        """Return cell indices and normalized local coordinates of points."""
        nx, ny = self.shape
        gx = (np.asarray(x, dtype=float) - self.x0) / self.dx
        gy = (np.asarray(y, dtype=float) - self.y0) / self.dy
        i = np.floor(gx)
        j = np.floor(gy)
        i = i - ((gx == i) & (np.asarray(hint_u) > 0))
        j = j - ((gy == j) & (np.asarray(hint_v) > 0))
        i = np.clip(i, 0, nx - 1).astype(np.intp)
        j = np.clip(j, 0, ny - 1).astype(np.intp)
        return i, j, gx - i - 0.5, gy - j - 0.5

    def _flat(self, x, y, hint_u, hint_v):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        flat = [np.ascontiguousarray(np.broadcast_to(np.asarray(a, dtype=float), shape)).ravel() for a in (x, y, hint_u, hint_v)]
        return shape, flat

    def __call__(self, x, y, hint_u=0.0, hint_v=0.0, components=None):
        c = self.coeffs if components is None else self.coeffs[list(components)]
        shape, (xf, yf, hu, hv) = self._flat(x, y, hint_u, hint_v)
        out = _sample(np.ascontiguousarray(c), self.x0, self.y0, self.dx, self.dy, xf, yf, hu, hv)
        return out.reshape((c.shape[0],) + shape)

    def advect(self, x, y, u0, v0, dt, order: int = 3):
        """Values of all variables at the characteristic feet, vectorized over points.

        Same result as :func:`evolve_advective_point` with ``v_dof=(u0, v0)``.
        """
        if order not in (2, 3):
            raise ValueError("order must be 2 or 3")
        shape, (xf, yf, uf, vf) = self._flat(x, y, u0, v0)
        iu, iv = self.velocity_components
        out = _advect(self.coeffs, self.x0, self.y0, self.dx, self.dy, xf, yf, uf, vf, float(dt), order, iu, iv)
        return out.reshape((self.coeffs.shape[0],) + shape)

    def velocity(self, x, y, hint_u=0.0, hint_v=0.0):
        u, v = self(x, y, hint_u, hint_v, components=self.velocity_components)
        return u, v


@njit(cache=True)
def _locate1(gx, gy, hu, hv, nx, ny):
    i = np.floor(gx)
    j = np.floor(gy)
    if gx == i and hu > 0:
        i -= 1.0
    if gy == j and hv > 0:
        j -= 1.0
    i = min(max(i, 0.0), nx - 1.0)
    j = min(max(j, 0.0), ny - 1.0)
    return int(i), int(j), gx - i - 0.5, gy - j - 0.5


@njit(cache=True)
def _eval1(c, v, i, j, xi, eta):
    r0 = c[v, 0, 0, i, j] + eta * (c[v, 0, 1, i, j] + eta * c[v, 0, 2, i, j])
    r1 = c[v, 1, 0, i, j] + eta * (c[v, 1, 1, i, j] + eta * c[v, 1, 2, i, j])
    r2 = c[v, 2, 0, i, j] + eta * (c[v, 2, 1, i, j] + eta * c[v, 2, 2, i, j])
    return r0 + xi * (r1 + xi * r2)


@njit(cache=True)
def _sample(c, x0, y0, dx, dy, x, y, hu, hv):
    nvar, nx, ny = c.shape[0], c.shape[3], c.shape[4]
    out = np.empty((nvar, x.size))
    for k in range(x.size):
        i, j, xi, eta = _locate1((x[k] - x0) / dx, (y[k] - y0) / dy, hu[k], hv[k], nx, ny)
        for v in range(nvar):
            out[v, k] = _eval1(c, v, i, j, xi, eta)
    return out


@njit(cache=True)
def _advect(c, x0, y0, dx, dy, x, y, u0, v0, dt, order, iu, iv):
    nvar, nx, ny = c.shape[0], c.shape[3], c.shape[4]
    out = np.empty((nvar, x.size))
    for k in range(x.size):
        us, vs = u0[k], v0[k]
        if order == 3:
            i, j, xi, eta = _locate1((x[k] - us * dt - x0) / dx, (y[k] - vs * dt - y0) / dy, us, vs, nx, ny)
            us = _eval1(c, iu, i, j, xi, eta)
            vs = _eval1(c, iv, i, j, xi, eta)
        i, j, xi, eta = _locate1((x[k] - us * dt - x0) / dx, (y[k] - vs * dt - y0) / dy, us, vs, nx, ny)
        for v in range(nvar):
            out[v, k] = _eval1(c, v, i, j, xi, eta)
    return out


def _sample_velocity(velocity, x, y, hint):
    if isinstance(velocity, PiecewiseField):
        return velocity.velocity(x, y, *hint)
    return velocity(x, y)


def characteristic_foot(x, y, velocity, dt, order: int = 3, v_dof=None):
    """Foot of the characteristic ending at ``(x, y)`` after ``dt``.

    ``velocity`` is a :class:`PiecewiseField` or any callable ``(x, y) -> (u, v)``.
    ``v_dof`` overrides the velocity at the starting point (the stored point
    value in the Active Flux setting).
    """
    if v_dof is None:
        u0, v0 = _sample_velocity(velocity, x, y, (0.0, 0.0))
    else:
        u0, v0 = v_dof
    xp = x - u0 * dt
    yp = y - v0 * dt
    if order == 2:
        return xp, yp, (u0, v0)
    if order != 3:
        raise ValueError("order must be 2 or 3")
    us, vs = _sample_velocity(velocity, xp, yp, (u0, v0))
    return x - us * dt, y - vs * dt, (us, vs)


def foot_point(x: float, y: float, field: PiecewiseField, dt: float, order: int = 3, v_dof=None) -> FootPoint:
    xf, yf, (us, vs) = characteristic_foot(x, y, field, dt, order, v_dof)
    i, j, _, _ = field.locate(xf, yf, us, vs)
    return FootPoint(float(xf), float(yf), (int(i), int(j)))


def evolve_advective_point(x, y, field: PiecewiseField, dt, order: int = 3, v_dof=None):
    """Sample every variable of ``field`` at the characteristic foot."""
    xf, yf, (us, vs) = characteristic_foot(x, y, field, dt, order, v_dof)
    return field(xf, yf, us, vs)


def local_error_order_probe(q0, velocity, exact, x, y, dts, order: int = 3):
    """Fit the exponent of the pointwise one-step error against ``dt``.

    ``q0(x, y)`` is the initial field, ``velocity(x, y)`` its velocity part and
    ``exact(t, x, y)`` the exact solution.  Returns ``(exponent, errors)``; the
    exponent is ``inf`` when every error vanishes to machine precision.
    """
    errors = []
    for dt in dts:
        xf, yf, _ = characteristic_foot(x, y, velocity, dt, order)
        err = np.max(np.abs(np.asarray(q0(xf, yf)) - np.asarray(exact(dt, x, y))))
        errors.append(float(err))
    errors = np.array(errors)
    if np.all(errors <= 1e-15):
        return float("inf"), errors
    slope, _ = np.polyfit(np.log(dts), np.log(errors), 1)
    return float(slope), errors
