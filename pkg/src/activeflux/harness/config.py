"""INI run configurations.

Sections and keys (all optional except ``case.name``)::

    [case]      name, n = "nx, ny" or "n", t_final, bounds = "xlo, xhi, ylo, yhi", boundary
    [params]    initializer parameters; tuples as comma lists, quadrant states as ne/nw/sw/se
    [solver]    any field of :class:`activeflux.state.Config`
    [converge]  grids = comma list of sizes
    [sweep]     mach = comma list
    [output]    dir, csv, pgm, radial, log

Overrides use ``section.key=value`` with the same syntax.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from activeflux.harness.cases import TestCase, make_case
from activeflux.state import Config

_BOOL = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}
QUADRANTS = ("ne", "nw", "sw", "se")


class ConfigError(ValueError):
    pass


def parse_value(text: str):
    """Number, bool, comma-separated tuple of numbers, or the raw string."""
    text = text.strip()
    if text.lower() in _BOOL and not text.isdigit():
        return _BOOL[text.lower()]
    if "," in text:
        return tuple(parse_value(p) for p in text.split(",") if p.strip())
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


@dataclass
class RunConfig:
    case: TestCase
    solver: Config
    grids: tuple = ()
    machs: tuple = ()
    output: dict = field(default_factory=dict)
    source: str = ""


def _as_pair(value, key):
    if isinstance(value, (int, float)):
        return int(value), int(value)
    if isinstance(value, tuple) and len(value) == 2:
        return int(value[0]), int(value[1])
    raise ConfigError(f"{key}: expected 'n' or 'nx, ny', got {value!r}")


def _as_tuple(value):
    return value if isinstance(value, tuple) else (value,)


def apply_override(parser: configparser.ConfigParser, item: str) -> None:
    """Apply one ``section.key=value`` override."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.key=value")
    lhs, value = item.split("=", 1)
    if "." not in lhs:
        raise ConfigError(f"override {item!r} lacks a section (e.g. solver.cfl=0.2)")
    section, key = lhs.strip().split(".", 1)
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, key.strip(), value.strip())


def load_config(path=None, overrides=(), text: str | None = None) -> RunConfig:
    parser = configparser.ConfigParser()
    if text is not None:
        parser.read_string(text)
    elif path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file {path} not found")
        parser.read(path)
    for item in overrides:
        apply_override(parser, item)
    return from_parser(parser, str(path or "<string>"))


def from_parser(parser: configparser.ConfigParser, source: str = "") -> RunConfig:
    if not parser.has_option("case", "name"):
        raise ConfigError("missing [case] name")
    sec = {s: {k: parse_value(v) for k, v in parser.items(s)} for s in parser.sections()}
    case_sec = dict(sec.get("case", {}))
    name = case_sec.pop("name")
    kw = {}
    if "n" in case_sec:
        kw["n"] = _as_pair(case_sec.pop("n"), "case.n")
    if "bounds" in case_sec:
        b = _as_tuple(case_sec.pop("bounds"))
        if len(b) != 4:
            raise ConfigError("case.bounds needs four numbers")
        kw["bounds"] = tuple(float(v) for v in b)
    if "t_final" in case_sec:
        kw["t_final"] = float(case_sec.pop("t_final"))
    if "boundary" in case_sec:
        kw["boundary"] = case_sec.pop("boundary")
    solver_boundary = sec.get("solver", {}).get("boundary")
    if solver_boundary is not None:
        kw["boundary"] = solver_boundary
    if case_sec:
        raise ConfigError(f"unknown [case] keys: {sorted(case_sec)}")

    params = dict(sec.get("params", {}))
    if any(q in params for q in QUADRANTS):
        missing = [q for q in QUADRANTS if q not in params]
        if missing:
            raise ConfigError(f"quadrant states missing: {missing}")
        params["states"] = tuple(tuple(float(v) for v in params.pop(q)) for q in QUADRANTS)
    if "center" in params:
        params["center"] = tuple(float(v) for v in params["center"])
    if params:
        kw["params"] = params
    try:
        case = make_case(name, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    solver_sec = dict(sec.get("solver", {}))
    known = {f.name: f.type for f in fields(Config) if f.name != "extra"}
    unknown = set(solver_sec) - set(known)
    if unknown:
        raise ConfigError(f"unknown [solver] keys: {sorted(unknown)}")
    solver_sec["boundary"] = case.boundary
    try:
        solver = Config(**solver_sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    grids = tuple(int(v) for v in _as_tuple(sec.get("converge", {}).get("grids", ())))
    machs = tuple(float(v) for v in _as_tuple(sec.get("sweep", {}).get("mach", ())))
    return RunConfig(case, solver, grids, machs, dict(sec.get("output", {})), source)
