"""Aharonov-Bohm propagator and resolvent kernels, Lippmann-Schwinger
scattering on radial grids, and verification of weighted dispersive decay."""

from .errors import (
    AccuracyError,
    BudgetError,
    ConvergenceError,
    DataError,
    DomainError,
    GridError,
    ResolutionError,
    ZeroResonanceError,
)
from .field import (
    Flux,
    PolarPoint,
    PotentialSpec,
    project_mode,
    reduce_flux,
    sigma_alpha,
    theta_grid,
    vector_potential,
    weight,
)
from .specfun import BesselPair, bessel_jy, bessel_jy_grid, gamma, mod_bessel_i

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BesselPair",
    "BudgetError",
    "ConvergenceError",
    "DataError",
    "DomainError",
    "Flux",
    "GridError",
    "PolarPoint",
    "PotentialSpec",
    "ResolutionError",
    "ZeroResonanceError",
    "bessel_jy",
    "bessel_jy_grid",
    "gamma",
    "mod_bessel_i",
    "project_mode",
    "reduce_flux",
    "sigma_alpha",
    "theta_grid",
    "vector_potential",
    "weight",
]
