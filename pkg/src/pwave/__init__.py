"""Strongly damped p-Laplacian wave equation on expanding 1D domains.

Simulation on a fixed reference interval, energy bookkeeping, and numerical
checks of the decay theory (embedding inequalities, Komornik-type integral
inequality, admissible parameter thresholds, decay envelopes).
"""

__version__ = "0.1.0"

from .domain import Constant, DomainTrajectory, PowerLaw, Tabulated
from .solver import ReferenceState, SolverConfig, simulate, step
from .energy import EnergyTrace, dissipation, energy, identity_residuals
from .weights import Identity, PowerShift, TabulatedWeight

__all__ = [
    "Constant",
    "DomainTrajectory",
    "EnergyTrace",
    "Identity",
    "PowerLaw",
    "PowerShift",
    "ReferenceState",
    "SolverConfig",
    "Tabulated",
    "TabulatedWeight",
    "dissipation",
    "energy",
    "identity_residuals",
    "simulate",
    "step",
]
