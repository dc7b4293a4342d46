"""Ideal-gas state conversions, Euler fluxes and run configuration.

States are arrays with the variable on the first axis: primitive
``(rho, u, v, p)`` and conserved ``(rho, m_x, m_y, E)``; any trailing shape is
allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

EPS = 1e-10


class InvalidStateError(ValueError):
    """A state with non-positive density or internal energy was converted."""


@dataclass
class Config:
    gamma: float = 1.4
    cfl: float = 0.45
    eps: float = EPS
    advection_order: int = 3
    boundary: str = "periodic"
    acoustics: bool = True
    advection: bool = True
    limiting: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if self.advection_order not in (2, 3):
            raise ValueError("advection_order must be 2 or 3")
        if self.boundary not in ("periodic", "outflow"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls) if f.name != "extra"]


def prim_to_cons(q, gamma: float = 1.4, check: bool = False) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    rho, u, v, p = q
    if check and (np.any(rho <= 0) or np.any(p <= 0)):
        raise InvalidStateError("non-positive density or pressure")
    return np.stack([rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)])


def cons_to_prim(q, gamma: float = 1.4, check: bool = False) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    rho, mx, my, e = q
    u = mx / rho
    v = my / rho
    p = (gamma - 1.0) * (e - 0.5 * (mx * u + my * v))
    if check and (np.any(rho <= 0) or np.any(p <= 0)):
        raise InvalidStateError("non-positive density or internal energy")
    return np.stack([rho, u, v, p])


def sound_speed(q, gamma: float = 1.4):
    """Sound speed of primitive states."""
    return np.sqrt(gamma * q[3] / q[0])


def euler_flux(q, gamma: float = 1.4, direction: int = 0) -> np.ndarray:
    """Flux of the conserved variables evaluated from primitive states."""
    rho, u, v, p = np.asarray(q, dtype=float)
    vn = u if direction == 0 else v
    enthalpy = gamma * p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    mass = rho * vn
    if direction == 0:
        return np.stack([mass, mass * u + p, mass * v, vn * enthalpy])
    return np.stack([mass, mass * u, mass * v + p, vn * enthalpy])


def euler_flux_cons(q, gamma: float = 1.4, direction: int = 0) -> np.ndarray:
    return euler_flux(cons_to_prim(q, gamma), gamma, direction)


def is_admissible(q, eps: float = EPS):
    """Elementwise: finite, ``rho >= eps`` and ``p >= eps`` for primitive states."""
    q = np.asarray(q)
    finite = np.all(np.isfinite(q), axis=0)
    with np.errstate(invalid="ignore"):
        return finite & (q[0] >= eps) & (q[3] >= eps)
