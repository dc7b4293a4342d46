"""Running test cases, invariant checks and convergence studies."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from activeflux.harness.cases import TestCase, solver_for
from activeflux.harness.output import RunLog
from activeflux.scheme import KINDS, AdmissibilityError, GridState, gauss_cell_averages
from activeflux.state import Config, cons_to_prim, is_admissible


@dataclass
class RunReport:
    case: str
    n: tuple
    steps: int = 0
    time: float = 0.0
    wall_clock: float = 0.0
    errors: dict = field(default_factory=dict)
    limiter_history: list = field(default_factory=list)
    conservation_drift: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    completed: bool = False

    @property
    def ok(self) -> bool:
        return self.completed and not self.violations

    def drift_per_100_steps(self) -> float:
        """Largest relative drift of any conserved total, scaled to 100 steps."""
        if not self.conservation_drift or self.steps == 0:
            return 0.0
        return float(np.max(self.conservation_drift)) * 100.0 / max(self.steps, 100)

    def summary(self) -> dict:
        lim = np.array([[d["point_limited"], d["faces_limited"]] for d in self.limiter_history]).reshape(-1, 2)
        return {
            "case": self.case,
            "n": list(self.n),
            "steps": self.steps,
            "time": self.time,
            "wall_clock": self.wall_clock,
            "errors": self.errors,
            "point_limited_total": int(lim[:, 0].sum()),
            "faces_limited_total": int(lim[:, 1].sum()),
            "max_conservation_drift": float(np.max(self.conservation_drift)) if self.conservation_drift else 0.0,
            "violations": self.violations,
            "completed": self.completed,
        }


def conserved_scale(state: GridState) -> np.ndarray:
    """Per-variable scale for relative drifts: the integral of ``|q|``."""
    a = state.interior_view("avg")
    return np.abs(a).reshape(4, -1).sum(axis=1) * state.grid.dx * state.grid.dy


# cumulative relative drift of the periodic totals; roundoff stays orders below this
CONSERVATION_TOL = 1e-10


def check_invariants(state: GridState, eps: float, periodic: bool) -> list:
    """Messages for every kind of dof that holds a non-finite state or ``rho, p < eps``."""
    problems = []
    with np.errstate(invalid="ignore", divide="ignore"):
        prim = {"avg": cons_to_prim(state.interior_view("avg", periodic))}
    for kind in KINDS:
        prim[kind] = state.interior_view(kind, periodic)
    for kind, q in prim.items():
        bad = ~is_admissible(q, eps)
        if np.any(bad):
            problems.append(f"step {state.steps}: {int(bad.sum())} inadmissible {kind} states")
    return problems


def run_case(
    case: TestCase,
    config: Config | None = None,
    n=None,
    log: RunLog | None = None,
    max_steps: int | None = None,
    callback=None,
) -> tuple[GridState, RunReport]:
    """Run ``case`` to its final time, checking admissibility after every step.

    A fatal :class:`AdmissibilityError` ends the run early and is recorded as
    a violation rather than raised.
    """
    solver = solver_for(case, config, n)
    cfg = solver.config
    periodic = solver.periodic
    state = solver.initial_state(case.prim())
    grid = solver.grid
    report = RunReport(case.name, (grid.nx, grid.ny))
    total0 = state.totals()
    scale = np.maximum(conserved_scale(state), np.finfo(float).tiny)
    log = log or RunLog()
    log.write({"event": "start", "case": case.name, "n": [grid.nx, grid.ny], "config": cfg.__dict__})

    drifted = []

    def on_step(st, diag):
        # drift is measured relative to the integral of |q| (momentum totals may vanish)
        drift = np.abs(st.totals() - total0) / scale
        report.conservation_drift.append(float(drift.max()) if periodic else 0.0)
        if report.conservation_drift[-1] > CONSERVATION_TOL and not drifted:
            drifted.append(st.steps)
            report.violations.append(f"step {st.steps}: conservation drift {report.conservation_drift[-1]:.3g}")
        report.limiter_history.append(diag.as_dict())
        problems = check_invariants(st, cfg.eps, periodic)
        report.violations.extend(problems)
        log.write({"step": st.steps, "t": st.time, **diag.as_dict(), "drift": report.conservation_drift[-1]})
        if callback is not None:
            callback(st, diag)

    start = time.perf_counter()
    try:
        solver.run(state, case.t_final, callback=on_step, max_steps=max_steps)
        report.completed = max_steps is not None or state.time >= case.t_final * (1.0 - 1e-14)
    except AdmissibilityError as exc:
        report.violations.append(str(exc))
    report.wall_clock = time.perf_counter() - start
    report.steps = state.steps
    report.time = state.time

    exact = case.exact()
    if exact is not None and report.completed:
        report.errors = solution_errors(state, exact, cfg.gamma, periodic)
    log.write({"event": "end", **report.summary()})
    return state, report


def solution_errors(state: GridState, exact, gamma: float, periodic: bool = True) -> dict:
    """L1 (cell-size weighted mean) and Linf errors of averages and edge point values.

    Averages are compared in conserved variables against Gauss averages of the
    exact solution; edge-midpoint point values in primitive variables.
    """
    g = state.grid
    t = state.time
    ref_avg = gauss_cell_averages(g, lambda x, y: exact(t, x, y), gamma)
    sx, sy = g.interior("avg")
    err = {}
    diff = np.abs(state.interior_view("avg") - ref_avg[:, sx, sy])
    for v, name in enumerate(("rho", "mx", "my", "E")):
        err[f"avg_{name}_l1"] = float(diff[v].mean())
        err[f"avg_{name}_linf"] = float(diff[v].max())
    edges = []
    for kind in ("ex", "ey"):
        x, y = g.coordinates(kind)
        ix, iy = g.interior(kind, periodic)
        ref = np.asarray(np.broadcast_to(exact(t, x[ix, iy], y[ix, iy]), (4,) + x[ix, iy].shape))
        edges.append(np.abs(state.interior_view(kind, periodic) - ref).reshape(4, -1))
    edges = np.concatenate(edges, axis=1)
    for v, name in enumerate(("rho", "u", "v", "p")):
        err[f"edge_{name}_l1"] = float(edges[v].mean())
        err[f"edge_{name}_linf"] = float(edges[v].max())
    return err


def eoc(errors, sizes) -> list:
    """``log2(e_N / e_2N)`` for consecutive grids of ratio 2; other pairs are skipped."""
    rows = []
    for (n0, e0), (n1, e1) in zip(zip(sizes, errors), zip(sizes[1:], errors[1:])):
        if n1 != 2 * n0:
            continue
        rate = math.log2(e0 / e1) if e0 > 0 and e1 > 0 else float("nan")
        rows.append((n0, n1, rate))
    return rows


@dataclass
class ConvergenceReport:
    case: str
    sizes: list
    runs: list
    eoc: dict

    def table(self, key: str = "avg_rho_l1") -> str:
        lines = [f"{'N':>6} {key:>16} {'EOC':>7}"]
        rates = {n1: r for _, n1, r in self.eoc.get(key, [])}
        for n, rep in zip(self.sizes, self.runs):
            e = rep.errors.get(key, float("nan"))
            r = rates.get(n)
            lines.append(f"{n:>6} {e:>16.6e} {'' if r is None else f'{r:7.3f}'}")
        return "\n".join(lines)


def run_convergence(case: TestCase, sizes, config: Config | None = None, log: RunLog | None = None) -> ConvergenceReport:
    """Run ``case`` on square grids ``sizes`` (scaled with the case's aspect ratio) and tabulate EOCs."""
    if case.exact() is None:
        raise ValueError(f"test case {case.name!r} has no exact solution")
    aspect = case.n[1] / case.n[0]
    runs = []
    for n in sizes:
        _, rep = run_case(case, config, n=(n, max(4, round(n * aspect))), log=log)
        runs.append(rep)
    keys = runs[0].errors.keys() if runs and runs[0].errors else []
    table = {}
    for key in keys:
        errs = [r.errors.get(key, float("nan")) for r in runs]
        table[key] = eoc(errs, list(sizes))
    return ConvergenceReport(case.name, list(sizes), runs, table)


def peak_speed(state: GridState) -> float:
    """Largest velocity magnitude of the cell averages."""
    a = state.interior_view("avg")
    return float(np.max(np.hypot(a[1], a[2]) / a[0]))


def mach_sweep(case: TestCase, machs, config: Config | None = None, log: RunLog | None = None) -> list:
    """Retained fraction of the peak speed at the final time, for each Mach number."""
    out = []
    for mach in machs:
        sub = TestCase(case.name, case.bounds, case.n, case.t_final, case.boundary, {**case.params, "mach": mach})
        v0 = peak_speed(sub.initial_state(config or Config()))
        state, rep = run_case(sub, config, log=log)
        out.append({"mach": mach, "retained": peak_speed(state) / v0, "report": rep})
    return out
