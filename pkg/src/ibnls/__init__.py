"""Simulator and diagnostics laboratory for the focusing inhomogeneous
biharmonic NLS equation i u_t + Lap^2 u - |x|^{-b}|u|^alpha u = 0 on radial
grids in dimension N >= 3 (N >= 5 in strict mode)."""

__version__ = "0.1.0"

from .params import (AdmissiblePair, ModelParams, ValidationReport,
                     critical_index, embedding_window, is_admissible,
                     validate_intercritical, verify_exponent_system)
from .grid import (RadialField, RadialGrid, RadialLaplacian, SpectralBasis,
                   build_grid, build_laplacian, eigendecompose)
from .groundstate import (GroundState, GroundStateControls, PetviashviliError,
                          ThresholdQuantities, solve_ground_state,
                          threshold_quantities)
from .propagator import (BackPropagation, Trajectory, back_propagated_profile,
                         evolve, linear_step, nonlinear_step,
                         standing_wave_orbit, strang_step, suggested_dt)
from . import diagnostics, fieldio

__all__ = [
    "AdmissiblePair", "ModelParams", "ValidationReport", "critical_index",
    "embedding_window", "is_admissible", "validate_intercritical",
    "verify_exponent_system",
    "RadialField", "RadialGrid", "RadialLaplacian", "SpectralBasis",
    "build_grid", "build_laplacian", "eigendecompose",
    "GroundState", "GroundStateControls", "PetviashviliError",
    "ThresholdQuantities", "solve_ground_state", "threshold_quantities",
    "BackPropagation", "Trajectory", "back_propagated_profile", "evolve",
    "linear_step", "nonlinear_step", "standing_wave_orbit", "strang_step",
    "suggested_dt",
    "diagnostics", "fieldio",
]
