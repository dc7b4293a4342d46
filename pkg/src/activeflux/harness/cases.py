"""Initial data of the bundled test problems.

Every initializer is a function ``prim(x, y, **params) -> (rho, u, v, p)`` on
arrays; a :class:`TestCase` couples one with its domain, final time and
boundary type.  Cases with a known exact solution also provide
``exact(t, x, y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from activeflux.scheme import Grid, GridState, Solver, state_from_function
from activeflux.state import Config

GAMMA = 1.4


def _periodic_offset(x, x0, length):
    """Signed distance ``x - x0`` wrapped to ``[-length/2, length/2)``."""
    return (x - x0 + 0.5 * length) % length - 0.5 * length


# -- contact wave --------------------------------------------------------------


def contact_wave(x, y, x0=-0.31, y0=-0.31, t=0.0, length=2.0):
    """Density bump advected with unit velocity and pressure on ``[-1, 1]^2``."""
    dx = _periodic_offset(x - t, x0, length)
    dy = _periodic_offset(y - t, y0, length)
    rho = 2.5 * np.exp(-40.0 * (dx * dx + dy * dy)) + 0.1
    one = np.ones_like(rho)
    return rho, one, one, one


# -- moving isentropic vortex ----------------------------------------------------


def vortex_temperature_deficit(gamma=GAMMA, strength=5.0):
    return (gamma - 1.0) * strength**2 / (8.0 * gamma * math.pi**2)


def moving_vortex(x, y, gamma=GAMMA, strength=5.0, t=0.0, center=(5.0, 5.0), length=10.0):
    dx = _periodic_offset(x - t, center[0], length)
    dy = _periodic_offset(y - t, center[1], length)
    r2 = dx * dx + dy * dy
    bump = strength / (2.0 * math.pi) * np.exp(0.5 * (1.0 - r2))
    temp = 1.0 - vortex_temperature_deficit(gamma, strength) * np.exp(1.0 - r2)
    rho = temp ** (1.0 / (gamma - 1.0))
    return rho, 1.0 - bump * dy, 1.0 + bump * dx, rho * temp


# -- spherical Sod -----------------------------------------------------------------


def spherical_sod(x, y, radius=0.3, inner=(1.0, 1.0), outer=(0.125, 0.1)):
    inside = np.hypot(x, y) < radius
    rho = np.where(inside, inner[0], outer[0])
    p = np.where(inside, inner[1], outer[1])
    zero = np.zeros_like(rho)
    return rho, zero, zero.copy(), p


# -- four-quadrant Riemann problem ---------------------------------------------------


def quadrant_riemann(x, y, states, center=(0.5, 0.5)):
    """``states`` are primitive states of the quadrants NE, NW, SW, SE (counterclockwise from x > cx, y > cy)."""
    states = [np.asarray(s, dtype=float) for s in states]
    if len(states) != 4 or any(s.shape != (4,) for s in states):
        raise ValueError("need four primitive states (rho, u, v, p)")
    for s in states:
        if not (s[0] > 0 and s[3] > 0):
            raise ValueError(f"inadmissible quadrant state {s}")
    right = np.asarray(x) >= center[0]
    top = np.asarray(y) >= center[1]
    masks = (right & top, ~right & top, ~right & ~top, right & ~top)
    return tuple(np.select(masks, [s[var] for s in states]) for var in range(4))


# -- Gresho vortex --------------------------------------------------------------------


def gresho_angular_velocity(r):
    return np.where(r < 0.2, 5.0 * r, np.where(r < 0.4, 2.0 - 5.0 * r, 0.0))


def gresho_pressure_excess(r):
    """Pressure above the background from ``dp/dr = rho u_phi^2 / r`` with ``rho = 1``."""
    r = np.asarray(r, dtype=float)
    safe = np.maximum(r, 1e-300)
    ring = 12.5 * r * r - 20.0 * r + 4.0 * np.log(safe) + 4.0 - 4.0 * math.log(0.2)
    return np.where(r < 0.2, 12.5 * r * r, np.where(r < 0.4, ring, 4.0 * math.log(2.0) - 2.0))


def gresho_background_pressure(mach, gamma=GAMMA):
    # peak speed 1 at r = 0.2, where the excess pressure is 1/2
    return 1.0 / (gamma * mach * mach) - 0.5


def gresho(x, y, mach=1e-2, gamma=GAMMA, center=(0.5, 0.5)):
    dx = x - center[0]
    dy = y - center[1]
    r = np.hypot(dx, dy)
    uphi = gresho_angular_velocity(r)
    rs = np.where(r > 0, r, 1.0)
    rho = np.ones_like(r)
    p = gresho_background_pressure(mach, gamma) + gresho_pressure_excess(r)
    return rho, -uphi * dy / rs, uphi * dx / rs, p


# -- smooth Kelvin-Helmholtz ---------------------------------------------------------


def kh_eta(y):
    y = np.asarray(y, dtype=float)
    lower = 0.5 * (1.0 + np.sin(16.0 * math.pi * (y + 0.25)))
    upper = 0.5 * (1.0 - np.sin(16.0 * math.pi * (y - 0.25)))
    return np.select(
        [(y >= -9 / 32) & (y < -7 / 32), (y >= -7 / 32) & (y < 7 / 32), (y >= 7 / 32) & (y < 9 / 32)],
        [lower, 1.0, upper],
        0.0,
    )


def smooth_kh(x, y, gamma=GAMMA, amplitude=1e-3, delta=0.1, mach=0.01):
    shear = 1.0 - 2.0 * kh_eta(y)
    rho = gamma + amplitude * shear
    return rho, mach * shear, delta * mach * np.sin(2.0 * math.pi * x) + 0.0 * y, np.ones_like(rho)


# -- test case registry -------------------------------------------------------------------


@dataclass
class TestCase:
    __test__ = False  # not a pytest class

    name: str
    bounds: tuple
    n: tuple
    t_final: float
    boundary: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("final time must be positive")
        if min(self.n) < 4:
            raise ValueError("grid sizes must be at least 4")
        if self.name not in INITIALIZERS:
            raise ValueError(f"unknown test case {self.name!r}; known: {sorted(INITIALIZERS)}")

    def grid(self, n=None) -> Grid:
        nx, ny = self.n if n is None else n
        return Grid(nx, ny, *self.bounds)

    def prim(self) -> Callable:
        fn = INITIALIZERS[self.name]
        params = dict(self.params)
        return lambda x, y: fn(x, y, **params)

    def exact(self) -> Callable | None:
        """``exact(t, x, y)`` for cases whose solution is a pure translation, else None."""
        fn = INITIALIZERS[self.name]
        if self.name not in EXACT:
            return None
        params = dict(self.params)
        return lambda t, x, y: fn(x, y, t=t, **params)

    def initial_state(self, config: Config, n=None) -> GridState:
        return state_from_function(self.grid(n), self.prim(), config)


INITIALIZERS = {
    "contact": contact_wave,
    "vortex": moving_vortex,
    "sod": spherical_sod,
    "riemann": quadrant_riemann,
    "gresho": gresho,
    "kh": smooth_kh,
}
EXACT = {"contact", "vortex"}

# a classical four-shock configuration, quadrants NE, NW, SW, SE
RIEMANN_EXAMPLE = (
    (1.5, 0.0, 0.0, 1.5),
    (0.5323, 1.206, 0.0, 0.3),
    (0.138, 1.206, 1.206, 0.029),
    (0.5323, 0.0, 1.206, 0.3),
)

DEFAULT_CASES = {
    "contact": dict(bounds=(-1.0, 1.0, -1.0, 1.0), n=(20, 20), t_final=2.0, boundary="periodic"),
    "vortex": dict(bounds=(0.0, 10.0, 0.0, 10.0), n=(25, 25), t_final=10.0, boundary="periodic"),
    "sod": dict(bounds=(-1.0, 1.0, -1.0, 1.0), n=(100, 100), t_final=0.2, boundary="outflow"),
    "riemann": dict(
        bounds=(0.0, 1.0, 0.0, 1.0),
        n=(100, 100),
        t_final=0.3,
        boundary="outflow",
        params=dict(states=RIEMANN_EXAMPLE),
    ),
    "gresho": dict(bounds=(0.0, 1.0, 0.0, 1.0), n=(50, 50), t_final=1.0, boundary="periodic"),
    "kh": dict(bounds=(0.0, 2.0, -0.5, 0.5), n=(64, 32), t_final=80.0, boundary="periodic"),
}


def make_case(name: str, **overrides) -> TestCase:
    if name not in DEFAULT_CASES:
        raise ValueError(f"unknown test case {name!r}; known: {sorted(DEFAULT_CASES)}")
    kw = dict(DEFAULT_CASES[name])
    params = {**kw.get("params", {}), **overrides.pop("params", {})}
    kw.update(overrides, params=params)
    return TestCase(name=name, **kw)


def solver_for(case: TestCase, config: Config | None = None, n=None) -> Solver:
    config = config or Config()
    if config.boundary != case.boundary:
        config = replace(config, boundary=case.boundary)
    return Solver(case.grid(n), config)
