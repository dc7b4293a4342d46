"""Bound preservation for point values and averages.

Point values that come out non-finite or below ``eps`` in density or pressure
are recomputed by a local Lax-Friedrichs step on half-cell control volumes
(a posteriori).  Average fluxes are convex blends of the Simpson flux and an
HLL flux, with the largest blending factor that keeps the HLL-type states
``q_hll +- theta df / lambda`` admissible (a priori).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from activeflux.state import EPS, cons_to_prim, euler_flux_cons, is_admissible, sound_speed


def point_needs_limiting(q, eps: float = EPS):
    """True where a primitive state is non-finite or has ``rho < eps`` or ``p < eps``."""
    return ~is_admissible(q, eps)


def lambda_estimate(q, gamma: float = 1.4):
    """Signal speed ``max(|u|, |v|) + c`` of primitive states."""
    q = np.asarray(q, dtype=float)
    return np.maximum(np.abs(q[1]), np.abs(q[2])) + sound_speed(q, gamma)


def _llf_increment(q_point, q_left, q_right, lam, gamma, direction):
    df = euler_flux_cons(q_right, gamma, direction) - euler_flux_cons(q_left, gamma, direction)
    return 0.5 * df - 0.5 * lam * (q_right - 2.0 * q_point + q_left)


def llf_edge(q_point, q_left, q_right, lam, dt, h, gamma: float = 1.4, direction: int = 0):
    """Fallback for an edge midpoint; all states conserved, ``h`` the cell size across the edge."""
    return q_point - (2.0 * dt / h) * _llf_increment(q_point, q_left, q_right, lam, gamma, direction)


def llf_node(q_point, q_ll, q_lr, q_ul, q_ur, lam, dt, dx, dy, gamma: float = 1.4):
    """Fallback for a node from its four adjacent averages (conserved)."""
    left = 0.5 * (q_ll + q_ul)
    right = 0.5 * (q_lr + q_ur)
    bottom = 0.5 * (q_ll + q_lr)
    top = 0.5 * (q_ul + q_ur)
    return (
        q_point
        - (2.0 * dt / dx) * _llf_increment(q_point, left, right, lam, gamma, 0)
        - (2.0 * dt / dy) * _llf_increment(q_point, bottom, top, lam, gamma, 1)
    )


def llf_point_fallback(kind: str, q_point, neighbours, lam, dt, dx, dy, gamma: float = 1.4):
    """Dispatch on the degree-of-freedom kind.

    ``neighbours`` is ``(left, right)`` for ``edge_x``, ``(bottom, top)`` for
    ``edge_y`` and ``(ll, lr, ul, ur)`` for ``node``.
    """
    if kind == "edge_x":
        return llf_edge(q_point, *neighbours, lam, dt, dx, gamma, 0)
    if kind == "edge_y":
        return llf_edge(q_point, *neighbours, lam, dt, dy, gamma, 1)
    if kind == "node":
        return llf_node(q_point, *neighbours, lam, dt, dx, dy, gamma)
    raise ValueError(f"unknown degree-of-freedom kind {kind!r}")


def clip_to_admissible(q_cons, gamma: float = 1.4, eps: float = EPS):
    """Convert to primitive, raising density and pressure to ``eps`` where needed.

    Returns ``(prim, clipped)`` with ``clipped`` marking the states touched.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        prim = cons_to_prim(q_cons, gamma)
        bad = ~is_admissible(prim, eps)
        if np.any(bad):
            rho = np.where(np.isfinite(q_cons[0]), np.maximum(q_cons[0], eps), eps)
            u = np.where(bad, np.nan_to_num(q_cons[1] / rho), prim[1])
            v = np.where(bad, np.nan_to_num(q_cons[2] / rho), prim[2])
            p = (gamma - 1.0) * (q_cons[3] - 0.5 * rho * (u * u + v * v))
            p = np.where(np.isfinite(p), np.maximum(p, eps), eps)
            fixed = np.stack([rho, u, v, p])
            prim = np.where(bad, fixed, prim)
    return prim, bad


def hll_state_and_flux(q_left, q_right, lam, gamma: float = 1.4, direction: int = 0):
    """HLL intermediate state and flux between two averages (conserved)."""
    f_left = euler_flux_cons(q_left, gamma, direction)
    f_right = euler_flux_cons(q_right, gamma, direction)
    q_hll = 0.5 * (q_left + q_right) - (f_right - f_left) / (2.0 * lam)
    f_hll = 0.5 * (f_left + f_right) - 0.5 * lam * (q_right - q_left)
    return q_hll, f_hll


def blend_density(df_rho, rho_hll, lam, eps: float = EPS):
    """Largest ``theta`` in [0, 1] keeping ``rho_hll +- theta df_rho / lam >= eps``."""
    df_rho = np.asarray(df_rho, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        target = np.where(
            df_rho > 0,
            np.minimum(df_rho, (rho_hll - eps) * lam),
            np.maximum(df_rho, (eps - rho_hll) * lam),
        )
        theta = np.where(df_rho != 0, target / df_rho, 1.0)
    theta = np.where(np.isfinite(theta), theta, 0.0)
    return np.clip(theta, 0.0, 1.0)


def pressure_coefficients(df, q_hll, lam, gamma: float = 1.4, eps: float = EPS):
    """``A, B, C`` of the sufficient condition ``theta (max(0, A) + |B|) < C``."""
    d_rho, d_mx, d_my, d_e = df
    rho, mx, my, e = q_hll
    floor = eps / (gamma - 1.0)
    a = 0.5 * (d_mx * d_mx + d_my * d_my) - d_e * d_rho
    b = (-(mx * d_mx + my * d_my) + d_e * rho + d_rho * e - d_rho * floor) * lam
    c = (-rho * floor - 0.5 * (mx * mx + my * my) + e * rho) * lam * lam
    return a, b, c


def blend_pressure(df, q_hll, lam, theta_rho, gamma: float = 1.4, eps: float = EPS):
    """Final blending factor; returns ``(theta, inadmissible_hll)``."""
    a, b, c = pressure_coefficients(df, q_hll, lam, gamma, eps)
    denom = np.maximum(0.0, a) + np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta_p = np.where(denom > 0, c / denom, 1.0)
    theta = np.minimum(np.minimum(theta_rho, theta_p), 1.0)
    theta = np.where(np.isfinite(theta), theta, 0.0)
    bad = ~(c > 0)
    theta = np.where(bad, 0.0, np.maximum(theta, 0.0))
    return theta, bad


def blend_fluxes(f_high, f_low, q_hll, lam, gamma: float = 1.4, eps: float = EPS):
    """Blended face fluxes; returns ``(flux, theta, inadmissible_hll)``.

    Faces whose high-order flux has a non-finite component use the HLL flux.
    """
    finite = np.all(np.isfinite(f_high), axis=0)
    df = np.where(finite, f_high - f_low, 0.0)
    theta_rho = blend_density(df[0], q_hll[0], lam, eps)
    theta, bad = blend_pressure(df, q_hll, lam, theta_rho, gamma, eps)
    theta = np.where(finite, theta, 0.0)
    return f_low + theta * df, theta, bad


@njit(cache=True)
def _blend_theta(df, q_hll, lam, gamma, eps):
    """Scalar form of :func:`blend_fluxes` for one face; returns ``(theta, inadmissible_hll)``."""
    d_rho = df[0]
    rho_hll = q_hll[0]
    if d_rho > 0:
        theta_rho = min(d_rho, (rho_hll - eps) * lam) / d_rho
    elif d_rho < 0:
        theta_rho = max(d_rho, (eps - rho_hll) * lam) / d_rho
    else:
        theta_rho = 1.0
    if not np.isfinite(theta_rho):
        theta_rho = 0.0
    theta_rho = min(max(theta_rho, 0.0), 1.0)
    floor = eps / (gamma - 1.0)
    a = 0.5 * (df[1] * df[1] + df[2] * df[2]) - df[3] * d_rho
    b = (-(q_hll[1] * df[1] + q_hll[2] * df[2]) + df[3] * rho_hll + d_rho * q_hll[3] - d_rho * floor) * lam
    c = (-rho_hll * floor - 0.5 * (q_hll[1] * q_hll[1] + q_hll[2] * q_hll[2]) + q_hll[3] * rho_hll) * lam * lam
    denom = max(0.0, a) + abs(b)
    theta_p = c / denom if denom > 0 else 1.0
    theta = min(min(theta_rho, theta_p), 1.0)
    if not np.isfinite(theta):
        theta = 0.0
    bad = not (c > 0)
    if bad:
        theta = 0.0
    else:
        theta = max(theta, 0.0)
    return theta, bad
