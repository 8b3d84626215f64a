"""Krylov solvers with subspace-correction preconditioners for sums of tensor spline spaces."""
from .bench import ExperimentConfig, TableRow, run_experiment, write_table
from .cases import Configuration
from .extended_system import ExtendedSystem, build_extended_system, kernel_dimension
from .geometry import GeometryMap
from .krylov import SolveReport, StoppingRule, cg, minres, pcg
from .spline_core import KnotVector, TensorSplineSpace, build_space
from .subspace_precond import Preconditioner, make_preconditioner

__all__ = [
    "Configuration", "ExperimentConfig", "ExtendedSystem", "GeometryMap", "KnotVector",
    "Preconditioner", "SolveReport", "StoppingRule", "TableRow", "TensorSplineSpace",
    "build_extended_system", "build_space", "cg", "kernel_dimension", "make_preconditioner",
    "minres", "pcg", "run_experiment", "write_table",
]
