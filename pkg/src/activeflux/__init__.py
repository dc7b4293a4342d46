"""Active Flux solver for the 2-D compressible Euler equations.

Point values evolve by additive splitting into locally linearized acoustics
(exact evolution operator) and nonlinear advection (two-stage characteristic
foot); averages are updated with space-time Simpson fluxes blended against
HLL fluxes for bound preservation.
"""

from activeflux.polynomial import Poly2
from activeflux.spherical_means import Wedge, eta, mu
from activeflux.state import Config
from activeflux.scheme import Grid, GridState, Solver

__all__ = ["Poly2", "Wedge", "eta", "mu", "Config", "Grid", "GridState", "Solver"]

__version__ = "0.1.0"
