"""Angular integrals behind the spherical means of polynomial data.

``eta(a)`` is the polar integral of ``sin**a``; ``mu(i, j, W)`` is the azimuthal
integral of ``cos**i sin**j`` over a wedge.  The spherical mean of
``n_x**alpha n_y**beta x**a y**b`` restricted to a wedge is assembled from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Wedge:
    """Angular sector ``[phi_min, phi_max)`` (radians) around a point."""

    phi_min: float
    phi_max: float

    def __post_init__(self):
        if not self.phi_min < self.phi_max:
            raise ValueError(f"empty wedge [{self.phi_min}, {self.phi_max})")
        if self.phi_max - self.phi_min > TWO_PI * (1.0 + 1e-14):
            raise ValueError("wedge wider than the full circle")

    @property
    def width(self) -> float:
        return self.phi_max - self.phi_min

    def reflect(self) -> "Wedge":
        """Image under the exchange x <-> y, i.e. ``phi -> pi/2 - phi``."""
        return Wedge(0.5 * math.pi - self.phi_max, 0.5 * math.pi - self.phi_min)


FULL_CIRCLE = Wedge(0.0, TWO_PI)


def _double_factorial(n: int) -> int:
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


@lru_cache(maxsize=None)
def eta(a: int) -> float:
    """``int_0^pi sin(theta)**a dtheta``."""
    if a < 0:
        raise ValueError(f"eta needs a >= 0, got {a}")
    if a == 0:
        return math.pi
    ratio = _double_factorial(a - 1) / _double_factorial(a)
    return ratio * (math.pi if a % 2 == 0 else 2.0)


@lru_cache(maxsize=None)
def _mu(i: int, j: int, lo: float, hi: float) -> float:
    total = 0.0
    for m in range(i + 1):
        for n in range(j + 1):
            k = i + j - 2 * m - 2 * n
            w = math.comb(i, m) * math.comb(j, n) * (-1) ** (n + j)
            if j % 2 == 0:
                sign = (-1) ** (j // 2)
                if k == 0:
                    term = sign * (hi - lo)
                else:
                    term = sign * (math.sin(k * hi) - math.sin(k * lo)) / k
            elif k != 0:
                sign = (-1) ** ((j - 1) // 2)
                term = sign * (math.cos(k * hi) - math.cos(k * lo)) / k
            else:
                continue
            total += w * term
    return total / 2 ** (i + j)


def mu(i: int, j: int, wedge: Wedge) -> float:
    """``int_{phi_min}^{phi_max} cos(phi)**i sin(phi)**j dphi`` in closed form."""
    if i < 0 or j < 0:
        raise ValueError(f"mu needs i, j >= 0, got ({i}, {j})")
    return _mu(i, j, wedge.phi_min, wedge.phi_max)


def mu_table(wedge: Wedge, nmax: int) -> np.ndarray:
    table = np.zeros((nmax + 1, nmax + 1))
    for i in range(nmax + 1):
        for j in range(nmax + 1):
            table[i, j] = mu(i, j, wedge)
    return table


def monomial_mean_coeff(a: int, b: int, alpha: int, beta: int, k: int, l: int, wedge: Wedge) -> float:
    """Coefficient of ``x**k y**l r**(a-k+b-l)`` in ``M^W[n_x^alpha n_y^beta x^a y^b]``."""
    if not (0 <= k <= a and 0 <= l <= b):
        raise ValueError(f"need 0 <= k <= a and 0 <= l <= b, got k={k}, l={l}, a={a}, b={b}")
    if min(a, b, alpha, beta) < 0:
        raise ValueError("exponents must be non-negative")
    i = a + alpha - k
    j = b + beta - l
    return math.comb(a, k) * math.comb(b, l) * mu(i, j, wedge) * eta(i + j + 1) / (2.0 * wedge.width)


def spherical_mean_monomial(alpha: int, beta: int, a: int, b: int, wedge: Wedge, r: float) -> float:
    """``M^W[n_x^alpha n_y^beta x^a y^b](0, r)`` for the wedge centred at the origin."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    i, j = a + alpha, b + beta
    return r ** (a + b) * mu(i, j, wedge) * eta(i + j + 1) / (2.0 * wedge.width)
