"""Symmetric-form analysis and 1-D simulation of capillary (Euler-Korteweg) fluids.

Modules:
    thermo: equations of state ``eps(rho, eta)`` with analytic derivatives.
    conjugate: conjugate variables ``(q, theta, u, r)`` and the potential Pi.
    spectral: matrices ``A, B(k), C(k)`` and the Hermitian dispersion relation.
    lagrangian1d: the 1-D mass-Lagrangian system, its 3x3 matrices and solver.
    eulerian1d: the 1-D augmented Eulerian solver with energy/constraint audits.
    cli: command-line entry point.
"""

__version__ = "0.1.0"

from .conjugate import ConjugateState, PhysicalState, from_conjugate, pi_eval, to_conjugate
from .errors import (
    CapillaryError,
    ConfigError,
    ConvergenceError,
    EigensolverError,
    NonFiniteError,
    NotPositiveDefiniteError,
    SimulationBlowUp,
    SingularJacobianError,
    ThermoDomainError,
)
from .spectral import DispersionResult, SystemMatrices, dispersion_eigs, oracle_dispersion
from .thermo import EquationOfState, Polytropic, ThermoEval, ThermoState, VanDerWaals

__all__ = [
    "CapillaryError",
    "ConfigError",
    "ConjugateState",
    "ConvergenceError",
    "DispersionResult",
    "EigensolverError",
    "EquationOfState",
    "NonFiniteError",
    "NotPositiveDefiniteError",
    "PhysicalState",
    "Polytropic",
    "SimulationBlowUp",
    "SingularJacobianError",
    "SystemMatrices",
    "ThermoDomainError",
    "ThermoEval",
    "ThermoState",
    "VanDerWaals",
    "dispersion_eigs",
    "from_conjugate",
    "oracle_dispersion",
    "pi_eval",
    "to_conjugate",
]
