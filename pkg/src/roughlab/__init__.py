"""Level-2 controlled rough paths on finite grids.

Rough paths and controlled paths (:mod:`roughlab.core`), signal lifts
(:mod:`roughlab.lift`), compensated-sum integrals (:mod:`roughlab.integral`),
vector fields (:mod:`roughlab.calculus`) and the Picard RDE solver
(:mod:`roughlab.solver`). The ``roughlab`` command lives in
:mod:`roughlab.lab`.
"""

from .core import (ControlledPath, Grid, HolderReport, RoughPath, chen_compose, chen_pair,
                   controlled_distance, controlled_seminorm, fixed_point_metric, holder_norms,
                   make_grid, remainders, rough_distance, rough_identity, rough_norm)
from .lift import (SignalSpec, coarsen, lift_ito, lift_piecewise_linear, relift_linear,
                   sample_signal, signal_path)
from .integral import (RateFit, compensated_sum, integral_controlled, local_expansion_error,
                       mesh_convergence, rough_integral)
from .calculus import VectorField, build_field, compose, compose_bound, fd_field
from .solver import SolveConfig, SolveReport, initial_center, picard_map, residual, solve, solve_local
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ControlledPath", "Grid", "HolderReport", "RateFit", "RoughPath", "SignalSpec",
    "SolveConfig", "SolveReport", "VectorField", "build_field", "chen_compose", "chen_pair",
    "coarsen", "compensated_sum", "compose", "compose_bound", "controlled_distance",
    "controlled_seminorm", "fd_field", "fixed_point_metric", "holder_norms", "initial_center",
    "integral_controlled", "lift_ito", "lift_piecewise_linear", "local_expansion_error",
    "make_grid", "mesh_convergence", "picard_map", "relift_linear", "remainders", "residual",
    "rough_distance", "rough_identity", "rough_integral", "rough_norm", "sample_signal",
    "signal_path", "solve", "solve_local",
]
