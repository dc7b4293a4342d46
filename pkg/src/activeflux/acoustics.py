"""Exact evolution operator for linear acoustics at a single point.

The system solved is ``v_t + c grad(p_hat) = 0``, ``p_hat_t + c div(v) = 0`` with
``p_hat = p / (rho0 c0)``.  Initial data are polynomials on wedges around the
point, written in coordinates centred on the point.  For a monomial on a wedge
the solution at the centre is a single power of ``tau = c t``, so every degree
of freedom type has a fixed, precomputable set of response coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from activeflux.polynomial import Poly2, translate
from activeflux.spherical_means import TWO_PI, Wedge, eta, mu

VARIABLES = ("p", "u", "v")
DOF_KINDS = ("node", "edge_x", "edge_y")

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class AcousticResponse:
    """Contribution of one wedge's monomial datum to ``(p_hat, u, v)`` at the centre, as polynomials in tau."""

    p: Polynomial
    u: Polynomial
    v: Polynomial

    def __call__(self, tau):
        return self.p(tau), self.u(tau), self.v(tau)

    def component(self, name: str) -> Polynomial:
        return getattr(self, name)


@dataclass(frozen=True)
class WedgeData:
    """Reconstruction of one adjacent cell, centred on the degree of freedom.

    ``p_hat`` must already be divided by ``rho0 * c0``.
    """

    wedge: Wedge
    p_hat: Poly2
    u: Poly2
    v: Poly2


def _power(coef: float, n: int) -> Polynomial:
    c = np.zeros(n + 1)
    c[n] = coef
    return Polynomial(c)


def _singular_factor(n: int) -> float:
    # The log-singular term at n == 0 cancels across wedges for continuous data.
    return 1.0 + 1.0 / n if n > 0 else 1.0


def response_from_p_monomial(a: int, b: int, wedge: Wedge) -> AcousticResponse:
    n = a + b
    k = 1.0 / (2.0 * wedge.width)
    p = (n + 1) * mu(a, b, wedge) * eta(n + 1) * k
    u = -(n + 2) * mu(a + 1, b, wedge) * eta(n + 2) * k
    v = -(n + 2) * mu(a, b + 1, wedge) * eta(n + 2) * k
    return AcousticResponse(_power(p, n), _power(u, n), _power(v, n))


def response_from_u_monomial(a: int, b: int, wedge: Wedge) -> AcousticResponse:
    n = a + b
    k = 1.0 / (2.0 * wedge.width)
    f = _singular_factor(n)
    m20, m11 = mu(a + 2, b, wedge), mu(a + 1, b + 1, wedge)
    e1, e3 = eta(n + 1), eta(n + 3)
    p = -(n + 2) * mu(a + 1, b, wedge) * eta(n + 2) * k
    u = k * ((n + 1) * m20 * e3 - (mu(a, b, wedge) * e1 - 3.0 * m20 * e3) * f)
    v = k * ((n + 1) * m11 * e3 + 3.0 * m11 * e3 * f)
    if n == 0:
        u += 2.0 / 3.0
    return AcousticResponse(_power(p, n), _power(u, n), _power(v, n))


def response_from_v_monomial(a: int, b: int, wedge: Wedge) -> AcousticResponse:
    """Mirror image of :func:`response_from_u_monomial` under x <-> y.

    Reflecting the wedge transposes the indices of ``mu``, so the formula is
    written with swapped indices directly.
    """
    n = a + b
    k = 1.0 / (2.0 * wedge.width)
    f = _singular_factor(n)
    m02, m11 = mu(a, b + 2, wedge), mu(a + 1, b + 1, wedge)
    e1, e3 = eta(n + 1), eta(n + 3)
    p = -(n + 2) * mu(a, b + 1, wedge) * eta(n + 2) * k
    u = k * ((n + 1) * m11 * e3 + 3.0 * m11 * e3 * f)
    v = k * ((n + 1) * m02 * e3 - (mu(a, b, wedge) * e1 - 3.0 * m02 * e3) * f)
    if n == 0:
        v += 2.0 / 3.0
    return AcousticResponse(_power(p, n), _power(u, n), _power(v, n))


RESPONSES = {
    "p": response_from_p_monomial,
    "u": response_from_u_monomial,
    "v": response_from_v_monomial,
}


@dataclass(frozen=True)
class DofTables:
    """Wedges around one kind of degree of freedom and their monomial responses.

    ``cell_offsets[w]`` is the centre of the cell filling wedge ``w`` relative
    to the degree of freedom, in units of the cell size.
    """

    kind: str
    wedges: tuple
    cell_offsets: tuple
    responses: dict = field(repr=False)
    degree: int = 2


def dof_geometry(kind: str):
    if kind == "node":
        wedges = (
            Wedge(0.0, HALF_PI),
            Wedge(HALF_PI, math.pi),
            Wedge(math.pi, 3 * HALF_PI),
            Wedge(3 * HALF_PI, TWO_PI),
        )
        offsets = ((0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5))
    elif kind == "edge_x":
        # midpoint of a vertical edge: cells to the right and to the left
        wedges = (Wedge(-HALF_PI, HALF_PI), Wedge(HALF_PI, 3 * HALF_PI))
        offsets = ((0.5, 0.0), (-0.5, 0.0))
    elif kind == "edge_y":
        wedges = (Wedge(0.0, math.pi), Wedge(math.pi, TWO_PI))
        offsets = ((0.0, 0.5), (0.0, -0.5))
    else:
        raise ValueError(f"unknown degree-of-freedom kind {kind!r}")
    return wedges, offsets


def precompute_dof_tables(kind: str, degree: int = 2) -> DofTables:
    """Responses for every wedge, input variable and monomial ``x^a y^b``, ``a, b <= degree``."""
    wedges, offsets = dof_geometry(kind)
    responses = {}
    for w, wedge in enumerate(wedges):
        for var in VARIABLES:
            for a in range(degree + 1):
                for b in range(degree + 1):
                    responses[w, var, a, b] = RESPONSES[var](a, b, wedge)
    return DofTables(kind, wedges, offsets, responses, degree)


def evolve_acoustic_point(wedges, rho0: float, c0: float, dt: float):
    """Evolve a single point value by ``dt``.

    Returns ``(p_new, u_new, v_new, rho_increment)`` where the density change
    follows from ``d/dt (rho c0**2 - p) = 0``.
    """
    if not (rho0 > 0 and c0 > 0 and dt >= 0):
        raise ValueError("need rho0 > 0, c0 > 0 and dt >= 0")
    tau = c0 * dt
    out = np.zeros(3)
    start = np.zeros(3)
    for wd in wedges:
        weight = wd.wedge.width / TWO_PI
        for var, poly in zip(VARIABLES, (wd.p_hat, wd.u, wd.v)):
            c = poly.coeffs
            if not np.all(np.isfinite(c)):
                return (math.nan,) * 4
            for (a, b), coef in np.ndenumerate(c):
                if coef == 0.0:
                    continue
                resp = RESPONSES[var](a, b, wd.wedge)
                out += weight * coef * np.array(resp(tau))
                start += weight * coef * np.array(resp(0.0))
    scale = rho0 * c0
    p_new = out[0] * scale
    p_old = start[0] * scale
    return p_new, out[1], out[2], (p_new - p_old) / c0**2


class AcousticOperator:
    """Grid form of the evolution operator for one cell aspect ratio.

    For each kind of degree of freedom and each adjacent cell, a matrix maps
    the cell's normalized reconstruction coefficients of ``(p_hat, u, v)`` to
    the coefficients of the response in ``sigma = c0 dt / dx``.  The constant
    term equals the point value for continuous data and is not stored; only
    powers 1..4 are.
    """

    def __init__(self, dx: float, dy: float, degree: int = 2):
        self.dx = dx
        self.dy = dy
        self.degree = degree
        self.tables = {kind: precompute_dof_tables(kind, degree) for kind in DOF_KINDS}
        self.dense = {kind: self._build(self.tables[kind]) for kind in DOF_KINDS}
        self.matrices = {kind: self._blas_layout(m) for kind, m in self.dense.items()}

    def _build(self, tables: DofTables):
        deg = self.degree
        nb = deg + 1
        npow = 2 * deg + 1
        aspect = self.dx / self.dy
        nw = len(tables.wedges)
        m = np.zeros((npow, 3, 3, nb, nb, nw))
        for w, (wedge, (ox, oy)) in enumerate(zip(tables.wedges, tables.cell_offsets)):
            weight = wedge.width / TWO_PI
            for iv, var in enumerate(VARIABLES):
                for a0 in range(nb):
                    for b0 in range(nb):
                        local = translate(Poly2.monomial(a0, b0), -ox, -oy).coeffs
                        for (a, b), t in np.ndenumerate(local):
                            if t == 0.0:
                                continue
                            resp = tables.responses[w, var, a, b]
                            for io, out in enumerate(VARIABLES):
                                coef = resp.component(out).coef
                                if len(coef) > a + b:
                                    m[a + b, io, iv, a0, b0, w] += weight * t * aspect**b * coef[a + b]
        # (power 1.., output, input variable, cell coefficient, wedge)
        return m[1:].reshape(npow - 1, 3, 3, nb * nb, nw)

    @staticmethod
    def _blas_layout(m):
        # rows: (power, output); columns: (cell coefficient, wedge) per input variable
        npow = m.shape[0]
        m = m.reshape(npow * 3, 3, -1)
        return np.ascontiguousarray(m[:, 0]), np.ascontiguousarray(m[:, 1:].reshape(npow * 3, -1))

    def evolve(self, kind: str, coeffs, slots, point, rho0, c0, dts):
        """Evolve many points of one kind.

        ``coeffs`` has shape ``(3, 9, M)``: variables ``(p, u, v)`` (raw
        pressure, not yet scaled) times the 3x3 normalized coefficients of
        ``M`` cells.  ``slots[w]`` holds, for every point, the index of the
        cell filling wedge ``w``.  ``point`` is ``(p, u, v)`` at the dofs,
        shape ``(3, N)``.  Returns an array ``(len(dts), 3, N)``.
        """
        mat_p, mat_uv = self.matrices[kind]
        point = np.asarray(point, dtype=float)
        n = point.shape[1]
        gathered = coeffs[:, :, slots]
        z = rho0 * c0
        acc = (mat_p @ gathered[0].reshape(-1, n)) / z + mat_uv @ gathered[1:].reshape(-1, n)
        acc = acc.reshape(-1, 3, n)
        start = np.stack([point[0] / z, point[1], point[2]])
        out = np.empty((len(dts), 3, n))
        for il, dt in enumerate(dts):
            sigma = c0 * dt / self.dx
            val = acc[-1]
            for k in range(acc.shape[0] - 2, -1, -1):
                val = acc[k] + sigma * val
            val = start + sigma * val
            out[il, 0] = val[0] * z
            out[il, 1:] = val[1:]
        return out
