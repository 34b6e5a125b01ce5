"""Trapezoidal central configurations of the Newtonian four-body problem."""

from .certify import CertificateReport, certify_minimum, hessian_lagrangian, principal_minors
from .explore import mass_sweep, probe_uniqueness, sample_mplus, simplex_grid
from .kkt import Multipliers, Solution, SolverConfig, kkt_residual, newton_solve
from .potential import MassVector, moment_of_inertia, newtonian_potential, normalize_inertia

__version__ = "0.1.0"
