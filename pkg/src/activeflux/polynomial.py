"""Dense bivariate polynomials.

A :class:`Poly2` stores ``c[a][b]`` for ``sum c[a][b] x**a y**b``.  The batch
helpers at the bottom work on coefficient arrays of shape ``(3, 3, ...)`` and
are what the grid kernels use; the class is used for precomputation and tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


@dataclass(frozen=True, eq=False)
class Poly2:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.ndim != 2:
            raise ValueError(f"coefficient table must be 2-D, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, a: int, b: int, value: float = 1.0) -> "Poly2":
        c = np.zeros((a + 1, b + 1))
        c[a, b] = value
        return cls(c)

    @classmethod
    def constant(cls, value: float) -> "Poly2":
        return cls([[value]])

    @classmethod
    def zero(cls) -> "Poly2":
        return cls([[0.0]])

    @property
    def max_deg_x(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def max_deg_y(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, x, y):
        return eval_poly(self, x, y)

    def __add__(self, other):
        return add(self, _as_poly(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_as_poly(other), -1.0))

    def __rsub__(self, other):
        return add(_as_poly(other), scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, Poly2):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __repr__(self):
        terms = [
            f"{c:+g}*x^{a}y^{b}"
            for (a, b), c in np.ndenumerate(self.coeffs)
            if c != 0.0
        ]
        return "Poly2(" + (" ".join(terms) if terms else "0") + ")"

    def diff_x(self) -> "Poly2":
        if self.max_deg_x == 0:
            return Poly2.zero()
        a = np.arange(1, self.max_deg_x + 1)[:, None]
        return Poly2(self.coeffs[1:] * a)

    def diff_y(self) -> "Poly2":
        if self.max_deg_y == 0:
            return Poly2.zero()
        b = np.arange(1, self.max_deg_y + 1)[None, :]
        return Poly2(self.coeffs[:, 1:] * b)


def _as_poly(p) -> Poly2:
    return p if isinstance(p, Poly2) else Poly2.constant(float(p))


def eval_poly(p: Poly2, x, y):
    """Horner evaluation in x, then y; broadcasts over array arguments."""
    c = p.coeffs
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    result = np.zeros(np.broadcast(x, y).shape)
    for a in range(c.shape[0] - 1, -1, -1):
        row = np.zeros_like(result)
        for b in range(c.shape[1] - 1, -1, -1):
            row = row * y + c[a, b]
        result = result * x + row
    return result if result.ndim else float(result)


def add(p: Poly2, q: Poly2) -> Poly2:
    shape = (max(p.coeffs.shape[0], q.coeffs.shape[0]), max(p.coeffs.shape[1], q.coeffs.shape[1]))
    c = np.zeros(shape)
    c[: p.coeffs.shape[0], : p.coeffs.shape[1]] += p.coeffs
    c[: q.coeffs.shape[0], : q.coeffs.shape[1]] += q.coeffs
    return Poly2(c)


def scale(p: Poly2, s: float) -> Poly2:
    return Poly2(p.coeffs * s)


def mul(p: Poly2, q: Poly2) -> Poly2:
    """Cauchy product; degrees add in each variable."""
    pa, pb = p.coeffs.shape
    qa, qb = q.coeffs.shape
    c = np.zeros((pa + qa - 1, pb + qb - 1))
    for a in range(pa):
        for b in range(pb):
            if p.coeffs[a, b] != 0.0:
                c[a : a + qa, b : b + qb] += p.coeffs[a, b] * q.coeffs
    return Poly2(c)


def shift_matrix(deg: int, d: float) -> np.ndarray:
    """Matrix ``S`` with ``(S @ c)[k] = `` coefficient of ``x**k`` in ``sum c[a] (x+d)**a``."""
    s = np.zeros((deg + 1, deg + 1))
    for a in range(deg + 1):
        for k in range(a + 1):
            s[k, a] = comb(a, k) * d ** (a - k)
    return s


def translate(p: Poly2, dx: float, dy: float) -> Poly2:
    """Return ``Q`` with ``Q(x, y) == P(x + dx, y + dy)``."""
    sx = shift_matrix(p.max_deg_x, dx)
    sy = shift_matrix(p.max_deg_y, dy)
    return Poly2(sx @ p.coeffs @ sy.T)


# -- batched (3, 3, ...) coefficient arrays ------------------------------------

# Rows map the samples at xi = -1/2, 0, 1/2 to the coefficients of 1, xi, xi**2.
LAGRANGE_3 = np.array(
    [
        [0.0, 1.0, 0.0],
        [-1.0, 0.0, 1.0],
        [2.0, -4.0, 2.0],
    ]
)


def biparabolic_coeffs(samples: np.ndarray) -> np.ndarray:
    """Interpolate samples on the 3x3 grid {-1/2, 0, 1/2}^2.

    ``samples[s, t, ...]`` is the value at ``(xi_s, eta_t)``.  Returns
    ``c[a, b, ...]`` in the normalized cell coordinates.
    """
    return np.einsum("as,bt,st...->ab...", LAGRANGE_3, LAGRANGE_3, samples)


_LAGRANGE_9 = np.kron(LAGRANGE_3, LAGRANGE_3)


def biparabolic_coeffs_stacked(samples: np.ndarray) -> np.ndarray:
    """Same as :func:`biparabolic_coeffs` for ``samples[var, s, t, ...]``, returning ``c[var, a, b, ...]``."""
    nvar = samples.shape[0]
    rest = samples.shape[3:]
    flat = samples.reshape(nvar, 9, -1)
    return np.matmul(_LAGRANGE_9, flat).reshape((nvar, 3, 3) + rest)


def eval_batch(coeffs: np.ndarray, xi, eta):
    """Evaluate ``coeffs[a, b, ...]`` (degree <= 2 each way) at broadcast points."""
    rows = [coeffs[a, 0] + eta * (coeffs[a, 1] + eta * coeffs[a, 2]) for a in range(3)]
    return rows[0] + xi * (rows[1] + xi * rows[2])
