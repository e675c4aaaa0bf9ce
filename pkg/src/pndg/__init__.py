"""Spherical-harmonic (P_N) discontinuous Galerkin solver for scaled radiative transfer
on periodic Cartesian meshes, with Fourier reference solutions and convergence studies."""

__version__ = "0.1.0"

from .assembly import (GlobalSystem, MaterialField, MomentField, assemble, error_norms, l2_norm, q_norm,
                       triple_norm)
from .basis import LocalBasis, radau_project, tensor_radau_project
from .errors import ConfigurationError, InputError, PnDGError, SolverError
from .geometry import PeriodicCartesianMesh, build_mesh
from .harmonics import MomentBasis, MomentMatrices, eval_basis, moment_matrices, sphere_quadrature
from .reference import FourierForcing, kinetic_fourier_solve, manufactured_forcing, pn_fourier_solve
from .solver import SolverConfig, solve
from .study import ErrorReport, StudyConfig, eoc, run_convergence, run_n_sweep

__all__ = [
    "ConfigurationError", "ErrorReport", "FourierForcing", "GlobalSystem", "InputError", "LocalBasis",
    "MaterialField", "MomentBasis", "MomentField", "MomentMatrices", "PeriodicCartesianMesh", "PnDGError",
    "SolverConfig", "SolverError", "StudyConfig", "assemble", "build_mesh", "eoc", "error_norms",
    "eval_basis", "kinetic_fourier_solve", "l2_norm", "manufactured_forcing", "moment_matrices",
    "pn_fourier_solve", "q_norm", "radau_project", "run_convergence", "run_n_sweep", "solve",
    "sphere_quadrature", "tensor_radau_project", "triple_norm",
]
