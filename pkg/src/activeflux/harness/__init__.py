"""Test problems, run driver, convergence studies and output writers."""

from activeflux.harness.cases import INITIALIZERS, TestCase, make_case
from activeflux.harness.config import RunConfig, load_config
from activeflux.harness.runner import RunReport, eoc, mach_sweep, run_case, run_convergence

__all__ = [
    "INITIALIZERS",
    "TestCase",
    "make_case",
    "RunConfig",
    "load_config",
    "RunReport",
    "eoc",
    "mach_sweep",
    "run_case",
    "run_convergence",
]
