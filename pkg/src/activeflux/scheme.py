"""Cartesian Active Flux scheme for the 2-D Euler equations.

Degrees of freedom per cell ``(i, j)``: the average (conserved variables),
point values (primitive variables) at nodes and at the midpoints of vertical
(``ex``) and horizontal (``ey``) edges.

All arrays carry ``ng`` ghost layers.  With padded indices, node ``(I, J)`` is
the lower-left corner of cell ``(I, J)``, ``ex[I, j]`` the midpoint of its left
edge and ``ey[i, J]`` of its bottom edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from activeflux.acoustics import AcousticOperator, dof_geometry
from numba import njit

from activeflux.advection import _locate1
from activeflux.limiting import (
    _blend_theta,
    blend_fluxes,
    clip_to_admissible,
    hll_state_and_flux,
    lambda_estimate,
    llf_edge,
    llf_node,
    point_needs_limiting,
)
from activeflux.polynomial import Poly2, biparabolic_coeffs_stacked
from activeflux.state import Config, cons_to_prim, euler_flux, is_admissible, prim_to_cons

# weights of Simpson's rule on {start, middle, end}
SIMPSON = (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)

KINDS = ("node", "ex", "ey")
_TABLE_KIND = {"node": "node", "ex": "edge_x", "ey": "edge_y"}


DT_COLLAPSE = 1e-3


class AdmissibilityError(RuntimeError):
    """Limiting could not produce admissible states."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    xlo: float = 0.0
    xhi: float = 1.0
    ylo: float = 0.0
    yhi: float = 1.0
    ng: int = 2

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("need at least 4 cells per direction")
        if self.ng < 1:
            raise ValueError("need at least one ghost layer")

    @property
    def dx(self) -> float:
        return (self.xhi - self.xlo) / self.nx

    @property
    def dy(self) -> float:
        return (self.yhi - self.ylo) / self.ny

    @property
    def shape_padded(self):
        return self.nx + 2 * self.ng, self.ny + 2 * self.ng

    def array_shape(self, kind: str):
        nxc, nyc = self.shape_padded
        return {
            "avg": (nxc, nyc),
            "node": (nxc + 1, nyc + 1),
            "ex": (nxc + 1, nyc),
            "ey": (nxc, nyc + 1),
        }[kind]

    def staggering(self, kind: str):
        """Whether the x and y positions sit on faces (True) or centres."""
        return {"avg": (False, False), "node": (True, True), "ex": (True, False), "ey": (False, True)}[kind]

    def coordinates(self, kind: str):
        """Physical coordinates ``(x, y)`` of all padded positions of a kind."""
        fx, fy = self.staggering(kind)
        nxk, nyk = self.array_shape(kind)
        ix = np.arange(nxk) - self.ng + (0.0 if fx else 0.5)
        iy = np.arange(nyk) - self.ng + (0.0 if fy else 0.5)
        x = self.xlo + ix * self.dx
        y = self.ylo + iy * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def interior(self, kind: str, periodic: bool = True):
        """Slices selecting the owned degrees of freedom of a kind."""
        fx, fy = self.staggering(kind)
        g = self.ng
        extra_x = 1 if (fx and not periodic) else 0
        extra_y = 1 if (fy and not periodic) else 0
        return slice(g, g + self.nx + extra_x), slice(g, g + self.ny + extra_y)

    def update_range(self, kind: str):
        """Slices of every dof on the boundary of an owned cell."""
        return self.interior(kind, periodic=False)


@dataclass
class GridState:
    grid: Grid
    avg: np.ndarray
    node: np.ndarray
    ex: np.ndarray
    ey: np.ndarray
    time: float = 0.0
    steps: int = 0

    def copy(self) -> "GridState":
        return GridState(self.grid, self.avg.copy(), self.node.copy(), self.ex.copy(), self.ey.copy(), self.time, self.steps)

    def points(self, kind: str) -> np.ndarray:
        return getattr(self, kind)

    def interior_view(self, kind: str, periodic: bool = True) -> np.ndarray:
        sx, sy = self.grid.interior(kind, periodic)
        return getattr(self, kind)[:, sx, sy]

    def totals(self, periodic: bool = True) -> np.ndarray:
        """Domain integrals of the conserved variables."""
        a = self.interior_view("avg")
        return a.reshape(4, -1).sum(axis=1) * self.grid.dx * self.grid.dy

    def all_points(self, periodic: bool = True) -> np.ndarray:
        return np.concatenate(
            [self.interior_view(k, periodic).reshape(4, -1) for k in KINDS], axis=1
        )


def fill_ghosts(arr: np.ndarray, grid: Grid, kind: str, periodic: bool) -> None:
    """Fill ghost layers in place, by periodic wrap or zeroth-order extrapolation."""
    g = grid.ng
    for axis, (n, staggered) in enumerate(zip((grid.nx, grid.ny), grid.staggering(kind))):
        ax = axis + 1
        length = arr.shape[ax]

        def sl(a, b):
            idx = [slice(None)] * arr.ndim
            idx[ax] = slice(a, b)
            return tuple(idx)

        if periodic:
            arr[sl(0, g)] = arr[sl(n, n + g)]
            arr[sl(g + n, length)] = arr[sl(g, length - n)]
        else:
            last = g + n if staggered else g + n - 1
            arr[sl(0, g)] = arr[sl(g, g + 1)]
            arr[sl(last + 1, length)] = arr[sl(last, last + 1)]


def gauss_cell_averages(grid: Grid, prim_fn, gamma: float, points: int = 3) -> np.ndarray:
    """Cell averages (conserved) of analytic primitive data by tensor Gauss quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    xc, yc = grid.coordinates("avg")
    total = np.zeros((4,) + xc.shape)
    for a, wa in zip(nodes, weights):
        for b, wb in zip(nodes, weights):
            q = np.asarray(prim_fn(xc + 0.5 * a * grid.dx, yc + 0.5 * b * grid.dy), dtype=float)
            total += 0.25 * wa * wb * prim_to_cons(np.broadcast_to(q, total.shape), gamma)
    return total


def state_from_function(grid: Grid, prim_fn, config: Config, quad_points: int = 3) -> GridState:
    """Sample point values and integrate averages of ``prim_fn(x, y) -> (rho, u, v, p)``."""
    periodic = config.boundary == "periodic"
    arrays = {}
    for kind in KINDS:
        x, y = grid.coordinates(kind)
        arrays[kind] = np.array(np.broadcast_to(prim_fn(x, y), (4,) + x.shape), dtype=float)
    avg = gauss_cell_averages(grid, prim_fn, config.gamma, quad_points)
    state = GridState(grid, avg, arrays["node"], arrays["ex"], arrays["ey"])
    for kind in ("avg",) + KINDS:
        fill_ghosts(getattr(state, kind), grid, kind, periodic)
    return state


def cell_center_value(avg, corners, edges):
    """Centre value making the 3x3 Simpson average equal ``avg``.

    ``corners`` and ``edges`` are sequences of the four corner and four edge
    values (any variables, as long as they match ``avg``).
    """
    return (36.0 * avg - sum(corners) - 4.0 * sum(edges)) / 16.0


def simpson_face_flux(f_start, f_half, f_end):
    """Space-time Simpson quadrature of a face flux.

    Each argument holds ``(f_first_node, f_midpoint, f_second_node)``.
    """
    total = 0.0
    for wt, level in zip(SIMPSON, (f_start, f_half, f_end)):
        total = total + wt * sum(ws * f for ws, f in zip(SIMPSON, level))
    return total


def update_average(avg, fx_left, fx_right, fy_bottom, fy_top, dt, dx, dy):
    return avg - dt / dx * (fx_right - fx_left) - dt / dy * (fy_top - fy_bottom)


@dataclass
class StepDiagnostics:
    dt: float = 0.0
    point_limited: int = 0
    point_clipped: int = 0
    faces_limited: int = 0
    hll_inadmissible: int = 0

    def as_dict(self):
        return dict(self.__dict__)


@njit(cache=True)
def _eval_cell(c, v, cell, xi, eta):
    r0 = c[cell, v, 0] + eta * (c[cell, v, 1] + eta * c[cell, v, 2])
    r1 = c[cell, v, 3] + eta * (c[cell, v, 4] + eta * c[cell, v, 5])
    r2 = c[cell, v, 6] + eta * (c[cell, v, 7] + eta * c[cell, v, 8])
    return r0 + xi * (r1 + xi * r2)


@njit(cache=True)
def _gather_acoustic(cells, slots, q0, gamma):
    """Rows ``(wedge, (p_hat, u, v), coefficient)`` of the wedge cells of every point, ``p_hat = p / (rho0 c0)``."""
    nw, n = slots.shape
    acoustic_vars = (3, 1, 2)
    g = np.empty((n, nw, 3, 9))
    for k in range(n):
        z = np.sqrt(gamma * q0[3, k] * q0[0, k])
        for w in range(nw):
            cell = slots[w, k]
            for iv in range(3):
                scale = 1.0 / z if iv == 0 else 1.0
                for m in range(9):
                    g[k, w, iv, m] = cells[cell, acoustic_vars[iv], m] * scale
    return g.reshape(n, nw * 27)


@njit(cache=True)
def _point_update(cells, nyc, acc, q0, x, y, dx, dy, dt, gamma, order, acoustics, advection):
    """Additive combination of the acoustic and advective updates at ``dt/2`` and ``dt``.

    ``cells[m, var, 3a + b]`` are the primitive reconstructions of the padded
    cells in cell-major order and ``acc[k, power - 1, (p_hat, u, v)]`` the
    acoustic response coefficients in ``sigma = c0 dt / dx`` of point ``k``.
    Returns ``(2, 4, N)``.
    """
    n = q0.shape[1]
    npow = acc.shape[1]
    nxc = cells.shape[0] // nyc
    out = np.empty((2, 4, n))
    for k in range(n):
        rho0, u0, v0, p0 = q0[0, k], q0[1, k], q0[2, k], q0[3, k]
        c0sq = gamma * p0 / rho0
        c0 = np.sqrt(c0sq)
        z = rho0 * c0
        for lvl in range(2):
            h = dt * (0.5 if lvl == 0 else 1.0)
            for var in range(4):
                out[lvl, var, k] = q0[var, k]
            if acoustics:
                sigma = c0 * h / dx
                res0 = acc[k, npow - 1, 0]
                res1 = acc[k, npow - 1, 1]
                res2 = acc[k, npow - 1, 2]
                for pw in range(npow - 2, -1, -1):
                    res0 = acc[k, pw, 0] + sigma * res0
                    res1 = acc[k, pw, 1] + sigma * res1
                    res2 = acc[k, pw, 2] + sigma * res2
                dp = sigma * res0 * z
                out[lvl, 0, k] += dp / c0sq
                out[lvl, 1, k] += sigma * res1
                out[lvl, 2, k] += sigma * res2
                out[lvl, 3, k] += dp
            if advection:
                us, vs = u0, v0
                if order == 3:
                    i, j, xi, eta = _locate1((x[k] - us * h) / dx, (y[k] - vs * h) / dy, us, vs, nxc, nyc)
                    us = _eval_cell(cells, 1, i * nyc + j, xi, eta)
                    vs = _eval_cell(cells, 2, i * nyc + j, xi, eta)
                i, j, xi, eta = _locate1((x[k] - us * h) / dx, (y[k] - vs * h) / dy, us, vs, nxc, nyc)
                for var in range(4):
                    out[lvl, var, k] += _eval_cell(cells, var, i * nyc + j, xi, eta) - q0[var, k]
    return out


@njit(cache=True)
def _prim_flux(rho, u, v, p, gamma, direction, out):
    vn = u if direction == 0 else v
    mass = rho * vn
    out[0] = mass
    out[1] = mass * u + (p if direction == 0 else 0.0)
    out[2] = mass * v + (p if direction == 1 else 0.0)
    out[3] = vn * (gamma * p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v))


@njit(cache=True)
def _cons_flux(q, gamma, direction, out):
    rho = q[0]
    u = q[1] / rho
    v = q[2] / rho
    p = (gamma - 1.0) * (q[3] - 0.5 * (q[1] * u + q[2] * v))
    _prim_flux(rho, u, v, p, gamma, direction, out)


@njit(cache=True)
def _face_flux(node, edge, avg_left, avg_right, gamma, eps, direction, limiting):
    """Space-time Simpson flux through faces normal to ``direction``, blended with HLL.

    Face ``(a, b)`` spans ``node[:, :, a, b]``, ``edge[:, :, a, b]`` and
    ``node[:, :, a, b + 1]``; the first axis holds the time levels
    ``(t, t + dt/2, t + dt)`` and the second the primitive variables.
    Returns ``(flux, faces_limited, hll_inadmissible)``.
    """
    na, nb = edge.shape[2], edge.shape[3]
    flux = np.empty((4, na, nb))
    f = np.empty(4)
    f_high = np.empty(4)
    f_left = np.empty(4)
    f_right = np.empty(4)
    q_left = np.empty(4)
    q_right = np.empty(4)
    q_hll = np.empty(4)
    df = np.empty(4)
    w_time = (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)
    limited = 0
    bad_count = 0
    for a in range(na):
        for b in range(nb):
            f_high[:] = 0.0
            for lvl in range(3):
                wt = w_time[lvl]
                for side in range(3):
                    if side == 1:
                        src = edge[lvl, :, a, b]
                        ws = 2.0 / 3.0
                    else:
                        src = node[lvl, :, a, b + side // 2]
                        ws = 1.0 / 6.0
                    _prim_flux(src[0], src[1], src[2], src[3], gamma, direction, f)
                    for c in range(4):
                        f_high[c] += wt * ws * f[c]
            if not limiting:
                for c in range(4):
                    flux[c, a, b] = f_high[c]
                continue
            q0 = edge[0, :, a, b]
            lam = max(abs(q0[1]), abs(q0[2])) + np.sqrt(gamma * q0[3] / q0[0])
            for c in range(4):
                q_left[c] = avg_left[c, a, b]
                q_right[c] = avg_right[c, a, b]
            _cons_flux(q_left, gamma, direction, f_left)
            _cons_flux(q_right, gamma, direction, f_right)
            finite = True
            for c in range(4):
                q_hll[c] = 0.5 * (q_left[c] + q_right[c]) - (f_right[c] - f_left[c]) / (2.0 * lam)
                flo = 0.5 * (f_left[c] + f_right[c]) - 0.5 * lam * (q_right[c] - q_left[c])
                f[c] = flo
                if not np.isfinite(f_high[c]):
                    finite = False
            for c in range(4):
                df[c] = f_high[c] - f[c] if finite else 0.0
            theta, bad = _blend_theta(df, q_hll, lam, gamma, eps)
            if not finite:
                theta = 0.0
            if theta < 1.0:
                limited += 1
            if bad:
                bad_count += 1
            for c in range(4):
                flux[c, a, b] = f[c] + theta * df[c]
    return flux, limited, bad_count


class Solver:
    """Time stepping for one grid and configuration."""

    def __init__(self, grid: Grid, config: Config | None = None):
        self.grid = grid
        self.config = config or Config()
        self.periodic = self.config.boundary == "periodic"
        self.acoustic = AcousticOperator(grid.dx, grid.dy)
        self._slots = {kind: self._slot_slices(kind) for kind in KINDS}
        # rows (wedge, input variable, coefficient), columns (power, output)
        self._matrices = {
            kind: np.ascontiguousarray(self.acoustic.dense[_TABLE_KIND[kind]].transpose(4, 2, 3, 0, 1)).reshape(
                -1, 3 * self.acoustic.dense[_TABLE_KIND[kind]].shape[0]
            )
            for kind in KINDS
        }
        self._positions = {kind: self._dof_positions(kind) for kind in KINDS}
        self.history: list[StepDiagnostics] = []

    # -- setup --------------------------------------------------------------

    def _slot_slices(self, kind):
        # flat indices of the cell filling each wedge, shape (W, N)
        sx, sy = self.grid.update_range(kind)
        nyc = self.grid.shape_padded[1]
        _, offsets = dof_geometry(_TABLE_KIND[kind])
        ii, jj = np.meshgrid(np.arange(sx.start, sx.stop), np.arange(sy.start, sy.stop), indexing="ij")
        slots = [((ii + math.floor(ox)) * nyc + jj + math.floor(oy)).ravel() for ox, oy in offsets]
        return np.stack(slots)

    def _dof_positions(self, kind):
        # padded coordinates with the padded lower-left corner at the origin
        g = self.grid
        fx, fy = g.staggering(kind)
        sx, sy = g.update_range(kind)
        ix = np.arange(sx.start, sx.stop) + (0.0 if fx else 0.5)
        iy = np.arange(sy.start, sy.stop) + (0.0 if fy else 0.5)
        x, y = np.meshgrid(ix * g.dx, iy * g.dy, indexing="ij")
        return x.ravel(), y.ravel()

    def initial_state(self, prim_fn, quad_points: int = 3) -> GridState:
        return state_from_function(self.grid, prim_fn, self.config, quad_points)

    # -- step building blocks ---------------------------------------------------

    def fill(self, state: GridState) -> None:
        for kind in ("avg",) + KINDS:
            fill_ghosts(getattr(state, kind), self.grid, kind, self.periodic)

    def max_speed(self, state: GridState) -> float:
        q = state.all_points(self.periodic)
        return float(np.max(lambda_estimate(q, self.config.gamma)))

    def compute_dt(self, state: GridState) -> float:
        return self.config.cfl * min(self.grid.dx, self.grid.dy) / self.max_speed(state)

    def reconstruct(self, state: GridState) -> np.ndarray:
        """Biparabolic primitive reconstructions of all padded cells, shape ``(4, 3, 3, nx, ny)``."""
        gamma = self.config.gamma
        node, ex, ey = state.node, state.ex, state.ey
        cn = prim_to_cons(node, gamma)
        cex = prim_to_cons(ex, gamma)
        cey = prim_to_cons(ey, gamma)
        corners = (cn[:, :-1, :-1], cn[:, 1:, :-1], cn[:, :-1, 1:], cn[:, 1:, 1:])
        edges = (cex[:, :-1, :], cex[:, 1:, :], cey[:, :, :-1], cey[:, :, 1:])
        with np.errstate(invalid="ignore", divide="ignore"):
            center = cons_to_prim(cell_center_value(state.avg, corners, edges), gamma)
        # samples[var, s, t] with s the x position and t the y position
        samples = np.empty((4, 3, 3) + state.avg.shape[1:])
        samples[:, 0, 0] = node[:, :-1, :-1]
        samples[:, 1, 0] = ey[:, :, :-1]
        samples[:, 2, 0] = node[:, 1:, :-1]
        samples[:, 0, 1] = ex[:, :-1, :]
        samples[:, 1, 1] = center
        samples[:, 2, 1] = ex[:, 1:, :]
        samples[:, 0, 2] = node[:, :-1, 1:]
        samples[:, 1, 2] = ey[:, :, 1:]
        samples[:, 2, 2] = node[:, 1:, 1:]
        return biparabolic_coeffs_stacked(samples)

    def cell_polynomials(self, state: GridState, i: int, j: int, coeffs=None):
        """Reconstruction of padded cell ``(i, j)`` as four :class:`Poly2` in normalized coordinates."""
        coeffs = self.reconstruct(state) if coeffs is None else coeffs
        return tuple(Poly2(coeffs[v, :, :, i, j]) for v in range(4))

    def update_points(self, state: GridState, coeffs: np.ndarray, dt: float):
        """Unlimited point values at ``t + dt/2`` and ``t + dt`` for every kind.

        Returns ``{kind: (q_half, q_full)}`` with arrays of shape ``(4, N)``
        ordered like the kind's update range.
        """
        cfg = self.config
        g = self.grid
        nxc, nyc = coeffs.shape[3:]
        cells = np.ascontiguousarray(coeffs.reshape(4, 9, nxc * nyc).transpose(2, 0, 1))
        out = {}
        for kind in KINDS:
            sx, sy = g.update_range(kind)
            q0 = np.ascontiguousarray(state.points(kind)[:, sx, sy].reshape(4, -1))
            x, y = self._positions[kind]
            if cfg.acoustics:
                with np.errstate(invalid="ignore", divide="ignore"):
                    acc = _gather_acoustic(cells, self._slots[kind], q0, cfg.gamma) @ self._matrices[kind]
                acc = acc.reshape(-1, self._matrices[kind].shape[1] // 3, 3)
            else:
                acc = np.zeros((q0.shape[1], 1, 3))
            levels = _point_update(
                cells, nyc, acc, q0, x, y, g.dx, g.dy, dt,
                cfg.gamma, cfg.advection_order, cfg.acoustics, cfg.advection,
            )
            out[kind] = (levels[0], levels[1])
        return out

    def limit_points(self, state: GridState, kind: str, q_new: np.ndarray, dt: float, diag: StepDiagnostics):
        """Replace inadmissible point values by the local Lax-Friedrichs fallback (in place)."""
        cfg = self.config
        bad = point_needs_limiting(q_new, cfg.eps)
        if not np.any(bad):
            return q_new
        sx, sy = self.grid.update_range(kind)
        shape = (sx.stop - sx.start, sy.stop - sy.start)
        flat = np.flatnonzero(bad)
        ii, jj = np.unravel_index(flat, shape)
        ii = ii + sx.start
        jj = jj + sy.start
        q_point = state.points(kind)[:, ii, jj]
        lam = lambda_estimate(q_point, cfg.gamma)
        qc = prim_to_cons(q_point, cfg.gamma)
        avg = state.avg
        g = self.grid
        if kind == "ex":
            res = llf_edge(qc, avg[:, ii - 1, jj], avg[:, ii, jj], lam, dt, g.dx, cfg.gamma, 0)
        elif kind == "ey":
            res = llf_edge(qc, avg[:, ii, jj - 1], avg[:, ii, jj], lam, dt, g.dy, cfg.gamma, 1)
        else:
            res = llf_node(
                qc,
                avg[:, ii - 1, jj - 1],
                avg[:, ii, jj - 1],
                avg[:, ii - 1, jj],
                avg[:, ii, jj],
                lam,
                dt,
                g.dx,
                g.dy,
                cfg.gamma,
            )
        prim, clipped = clip_to_admissible(res, cfg.gamma, cfg.eps)
        q_new[:, flat] = prim
        diag.point_limited += flat.size
        diag.point_clipped += int(np.count_nonzero(clipped))
        return q_new

    def _identify_periodic(self, kind, arr):
        # duplicated periodic dofs must be bitwise identical for conservation
        if not self.periodic:
            return
        fx, fy = self.grid.staggering(kind)
        if fx:
            arr[:, -1, :] = arr[:, 0, :]
        if fy:
            arr[:, :, -1] = arr[:, :, 0]

    def face_fluxes(self, state: GridState, new_points: dict, dt: float, diag: StepDiagnostics):
        """Blended x- and y-face fluxes over the owned faces."""
        cfg = self.config
        g = self.grid
        levels = {}
        for kind in KINDS:
            sx, sy = g.update_range(kind)
            levels[kind] = np.stack((state.points(kind)[:, sx, sy],) + tuple(new_points[kind]))
        avg = state.avg
        sx, sy = g.update_range("ex")
        fx, limited_x, bad_x = _face_flux(
            levels["node"], levels["ex"], avg[:, sx.start - 1 : sx.stop - 1, sy], avg[:, sx, sy],
            cfg.gamma, cfg.eps, 0, cfg.limiting,
        )
        sx, sy = g.update_range("ey")
        tr = (0, 1, 3, 2)
        fy, limited_y, bad_y = _face_flux(
            levels["node"].transpose(tr), levels["ey"].transpose(tr),
            avg[:, sx, sy.start - 1 : sy.stop - 1].transpose(0, 2, 1), avg[:, sx, sy].transpose(0, 2, 1),
            cfg.gamma, cfg.eps, 1, cfg.limiting,
        )
        fy = fy.transpose(0, 2, 1)
        diag.faces_limited += limited_x + limited_y
        diag.hll_inadmissible += bad_x + bad_y
        if self.periodic:
            fx[:, -1, :] = fx[:, 0, :]
            fy[:, :, -1] = fy[:, :, 0]
        return fx, fy

    def step(self, state: GridState, dt: float | None = None) -> StepDiagnostics:
        """Advance ``state`` in place by one time step."""
        cfg = self.config
        g = self.grid
        if dt is None:
            dt = self.compute_dt(state)
        diag = StepDiagnostics(dt=dt)
        coeffs = self.reconstruct(state)
        new_points = self.update_points(state, coeffs, dt)
        for kind in KINDS:
            sx, sy = g.update_range(kind)
            shape = (4, sx.stop - sx.start, sy.stop - sy.start)
            limited = []
            for q, h in zip(new_points[kind], (0.5 * dt, dt)):
                if cfg.limiting:
                    q = self.limit_points(state, kind, q, h, diag)
                q = q.reshape(shape)
                self._identify_periodic(kind, q)
                limited.append(q)
            new_points[kind] = tuple(limited)

        fx, fy = self.face_fluxes(state, new_points, dt, diag)
        sx, sy = g.interior("avg")
        state.avg[:, sx, sy] = update_average(
            state.avg[:, sx, sy], fx[:, :-1, :], fx[:, 1:, :], fy[:, :, :-1], fy[:, :, 1:], dt, g.dx, g.dy
        )
        for kind in KINDS:
            sx, sy = g.update_range(kind)
            state.points(kind)[:, sx, sy] = new_points[kind][1]
        self.fill(state)
        state.time += dt
        state.steps += 1
        self.history.append(diag)

        if cfg.limiting:
            with np.errstate(invalid="ignore", divide="ignore"):
                avg_prim = cons_to_prim(state.interior_view("avg"), cfg.gamma)
            if not np.all(is_admissible(avg_prim, cfg.eps)):
                raise AdmissibilityError(f"inadmissible cell average after step {state.steps} (t={state.time:.6g})")
        return diag

    def run(self, state: GridState, t_final: float, callback=None, max_steps: int | None = None) -> GridState:
        """Step until ``t_final``; the last step is shortened to land on it exactly.

        A CFL step that falls below ``DT_COLLAPSE`` times the first one means
        spurious wave speeds are growing without bound, and is raised as an
        :class:`AdmissibilityError` instead of stepping forever.
        """
        dt_first = None
        while state.time < t_final * (1.0 - 1e-14):
            if max_steps is not None and state.steps >= max_steps:
                break
            dt_cfl = self.compute_dt(state)
            dt_first = dt_cfl if dt_first is None else dt_first
            if not dt_cfl > DT_COLLAPSE * dt_first:
                raise AdmissibilityError(
                    f"time step collapsed to {dt_cfl:.3g} after step {state.steps} (t={state.time:.6g})"
                )
            dt = min(dt_cfl, t_final - state.time)
            self.step(state, dt)
            if callback is not None:
                callback(state, self.history[-1])
        return state
