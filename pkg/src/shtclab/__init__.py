"""Energy-conservative solvers for first-order symmetrizable hyperbolic
systems (acoustics, Maxwell, hyperbolized Maxwell) on periodic 2D meshes.

Two schemes share the system definitions: an explicit collocated
finite-volume method whose two-point flux satisfies the discrete flux
compatibility identity, and a staggered semi-implicit method built on
path integrals of the dual variables that conserves total energy to
round-off for arbitrary time steps.
"""

from .diagnostics import DiagnosticRecord, read_series, total_energy, write_series
from .grid import StaggeredMesh, identity_suite
from .htc import RK1, RK4, ButcherTableau, PositivityError, abgrall_flux, cfl_dt, load_tableau, rk_step
from .simm import (PathQuadrature, PicardConfig, PicardStats, SolverError,
                   StaggeredFields, involution_report, picard_step)
from .systems import EnergyParams, SystemKind, make_system

__version__ = "0.1.0"

__all__ = [
    "ButcherTableau",
    "DiagnosticRecord",
    "EnergyParams",
    "PathQuadrature",
    "PicardConfig",
    "PicardStats",
    "PositivityError",
    "RK1",
    "RK4",
    "SolverError",
    "StaggeredFields",
    "StaggeredMesh",
    "SystemKind",
    "abgrall_flux",
    "cfl_dt",
    "identity_suite",
    "involution_report",
    "load_tableau",
    "make_system",
    "picard_step",
    "read_series",
    "rk_step",
    "total_energy",
    "write_series",
]
