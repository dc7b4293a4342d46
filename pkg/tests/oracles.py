"""Independent reference computations used by the tests.

Nothing here calls the closed forms under test: angular integrals are done by
numerical quadrature and exact PDE solutions by Taylor series in time.
"""

import math

import numpy as np
from scipy import integrate

_GL = {}


def gauss_legendre(n, lo, hi):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL[n]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def mu_quad(i, j, lo, hi):
    """Adaptive 1-D quadrature of cos^i sin^j over [lo, hi]."""
    val, _ = integrate.quad(lambda p: math.cos(p) ** i * math.sin(p) ** j, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def eta_quad(a):
    val, _ = integrate.quad(lambda t: math.sin(t) ** a, 0.0, math.pi, epsabs=1e-13, epsrel=1e-13)
    return val


def angular_mean(g, lo, hi, n=64):
    """``1/(2 dphi) int_lo^hi int_0^pi g(nx, ny) sin(theta) dtheta dphi`` with the unit vector of the 3-sphere."""
    th, wt = gauss_legendre(n, 0.0, math.pi)
    ph, wp = gauss_legendre(n, lo, hi)
    T, P = np.meshgrid(th, ph, indexing="ij")
    nx = np.sin(T) * np.cos(P)
    ny = np.sin(T) * np.sin(P)
    return float(np.sum(np.outer(wt, wp) * g(nx, ny) * np.sin(T)) / (2.0 * (hi - lo)))


def responses_by_quadrature(var, a, b, lo, hi):
    """``(p, u, v)`` coefficients of ``tau**(a+b)`` for monomial data ``x^a y^b`` in ``var`` on a wedge.

    Spherical means of monomials are ``r**n`` times an angular mean, so the
    radial derivatives in the solution formulas are taken by hand and the
    angular means by quadrature.
    """
    n = a + b

    def A(extra):
        return angular_mean(lambda nx, ny: extra(nx, ny) * nx**a * ny**b, lo, hi)

    one = lambda nx, ny: 1.0  # noqa: E731
    if var == "p":
        return (
            (n + 1) * A(one),
            -(n + 2) * A(lambda nx, ny: nx),
            -(n + 2) * A(lambda nx, ny: ny),
        )
    # velocity data on the component ``c``; results for the other one follow by symmetry
    if var == "u":
        nc, no = (lambda nx, ny: nx), (lambda nx, ny: ny)
    else:
        nc, no = (lambda nx, ny: ny), (lambda nx, ny: nx)
    p = -(n + 2) * A(nc)
    m_cc = A(lambda nx, ny: nc(nx, ny) ** 2)
    m_co = A(lambda nx, ny: nc(nx, ny) * no(nx, ny))
    m_0 = A(one)
    integral = 1.0 / n if n > 0 else 0.0
    comp = (n + 1) * m_cc - (m_0 - 3.0 * m_cc) * (1.0 + integral)
    other = (n + 1) * m_co + 3.0 * m_co * (1.0 + integral)
    if n == 0:
        comp += 2.0 / 3.0
    return (p, comp, other) if var == "u" else (p, other, comp)


def acoustic_taylor(P, U, V, tau, order=8):
    """Exact solution at the origin for global polynomial ``(p_hat, u, v)`` data, by Taylor series in tau.

    ``P, U, V`` are coefficient arrays ``c[a, b]`` of ``x^a y^b``; the system is
    ``p_t = -div v``, ``v_t = -grad p`` with unit speed.
    """
    import sympy as sp

    x, y = sp.symbols("x y")

    def poly(M):
        return sum(float(M[a, b]) * x**a * y**b for a in range(M.shape[0]) for b in range(M.shape[1]))

    p, u, v = poly(P), poly(U), poly(V)
    out = np.zeros(3)
    for k in range(order + 1):
        vals = [float(e.subs({x: 0, y: 0})) for e in (p, u, v)]
        out += np.array(vals) * tau**k / math.factorial(k)
        p, u, v = -(sp.diff(u, x) + sp.diff(v, y)), -sp.diff(p, x), -sp.diff(p, y)
    return out
