"""Command line driver.

    activeflux run <config>        run one case, write outputs
    activeflux converge <config>   grid refinement study with EOC table
    activeflux sweep-mach <config> Gresho-type runs over several Mach numbers

Flags override config keys; ``--set section.key=value`` reaches any key.
Exit status: 0 on success, 1 if any invariant was violated (inadmissible
state, unfinished run), 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from activeflux.harness.config import ConfigError, load_config
from activeflux.harness.output import RunLog, write_heatmaps, write_radial_csv, write_state_csv
from activeflux.harness.runner import mach_sweep, run_case, run_convergence

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

# radial scatter outputs are centred on the vortex or the shock tube
_RADIAL_CENTER = {"sod": (0.0, 0.0), "gresho": (0.5, 0.5)}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="INI run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    common.add_argument("--n", help="grid size, 'n' or 'nx,ny' (case.n)")
    common.add_argument("--t-final", type=float, help="final time (case.t_final)")
    common.add_argument("--cfl", type=float, help="CFL number (solver.cfl)")
    common.add_argument("--no-limiting", action="store_true", help="disable bound preservation (solver.limiting)")
    common.add_argument("--out", help="output directory (output.dir)")
    common.add_argument("--max-steps", type=int, help="stop after this many steps")

    p = argparse.ArgumentParser(prog="activeflux", description="Active Flux solver for the 2-D Euler equations")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one test case")
    conv = sub.add_parser("converge", parents=[common], help="convergence study")
    conv.add_argument("--grids", help="comma list of grid sizes (converge.grids)")
    sweep = sub.add_parser("sweep-mach", parents=[common], help="Mach number sweep")
    sweep.add_argument("--mach", help="comma list of Mach numbers (sweep.mach)")
    return p


def _overrides(args) -> list:
    items = []
    if args.n:
        items.append(f"case.n={args.n}")
    if args.t_final is not None:
        items.append(f"case.t_final={args.t_final!r}")
    if args.cfl is not None:
        items.append(f"solver.cfl={args.cfl!r}")
    if args.no_limiting:
        items.append("solver.limiting=false")
    if args.out:
        items.append(f"output.dir={args.out}")
    if getattr(args, "grids", None):
        items.append(f"converge.grids={args.grids}")
    if getattr(args, "mach", None):
        items.append(f"sweep.mach={args.mach}")
    return items + list(args.overrides)


def _outdir(rc) -> Path | None:
    d = rc.output.get("dir")
    if not d:
        return None
    path = Path(str(d))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_outputs(rc, state, outdir: Path, tag: str) -> None:
    out = rc.output
    periodic = rc.solver.boundary == "periodic"
    if out.get("csv", True):
        write_state_csv(state, outdir / f"{tag}state.csv", periodic)
    if out.get("pgm", True):
        write_heatmaps(state, outdir, rc.solver.gamma, prefix=tag)
    name = rc.case.name
    if out.get("radial", name in _RADIAL_CENTER):
        center = rc.case.params.get("center") or _RADIAL_CENTER.get(name, (0.0, 0.0))
        write_radial_csv(state, outdir / f"{tag}radial.csv", rc.solver.gamma, center)


def _report_violations(reports) -> int:
    bad = [r for r in reports if not r.ok]
    for r in bad:
        msgs = r.violations or ["run did not reach the final time"]
        for m in msgs[:10]:
            print(f"INVARIANT VIOLATION [{r.case} {r.n[0]}x{r.n[1]}]: {m}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_run(rc, args) -> int:
    outdir = _outdir(rc)
    with RunLog(outdir / "run.log" if outdir else None) as runlog:
        state, rep = run_case(rc.case, rc.solver, log=runlog, max_steps=args.max_steps)
    if outdir is not None:
        _write_outputs(rc, state, outdir, "")
    print(json.dumps(rep.summary(), indent=2, sort_keys=True))
    return _report_violations([rep])


def cmd_converge(rc, args) -> int:
    if not rc.grids:
        raise ConfigError("converge needs [converge] grids or --grids")
    outdir = _outdir(rc)
    with RunLog(outdir / "run.log" if outdir else None) as runlog:
        conv = run_convergence(rc.case, rc.grids, rc.solver, log=runlog)
    for key in ("avg_rho_l1", "edge_p_linf", "edge_u_linf", "edge_v_linf"):
        if key in conv.eoc:
            print(conv.table(key))
            print()
    if outdir is not None:
        with (outdir / "eoc.json").open("w") as fh:
            json.dump({"sizes": conv.sizes, "eoc": conv.eoc, "runs": [r.summary() for r in conv.runs]}, fh, indent=2)
    return _report_violations(conv.runs)


def cmd_sweep(rc, args) -> int:
    if not rc.machs:
        raise ConfigError("sweep-mach needs [sweep] mach or --mach")
    if rc.case.name not in ("gresho", "kh"):
        raise ConfigError(f"test case {rc.case.name!r} has no Mach parameter")
    outdir = _outdir(rc)
    with RunLog(outdir / "run.log" if outdir else None) as runlog:
        rows = mach_sweep(rc.case, rc.machs, rc.solver, log=runlog)
    print(f"{'mach':>10} {'retained':>10} {'steps':>8} {'wall[s]':>9}")
    for row in rows:
        rep = row["report"]
        print(f"{row['mach']:>10.3g} {row['retained']:>10.5f} {rep.steps:>8d} {rep.wall_clock:>9.1f}")
    if outdir is not None:
        with (outdir / "sweep.json").open("w") as fh:
            json.dump([{"mach": r["mach"], "retained": r["retained"], **r["report"].summary()} for r in rows], fh, indent=2)
    return _report_violations([r["report"] for r in rows])


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "sweep-mach": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        rc = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](rc, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
