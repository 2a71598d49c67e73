"""High-order fixed-point fast sweeping for static Hamilton-Jacobi equations."""

from .grid import (Grid2D, PointCategory, classify_points, extrapolate_derivative_ghosts,
                   extrapolate_ghosts)
from .hamiltonian import ElasticParams, HamiltonianKind
from .problems import ProblemSpec, get_problem, masked_error, pwave_reference, registry
from .reconstruction import WeightParams
from .solver import (Diverged, IterationStats, NotConverged, SchemeConfig, SchemeKind,
                     SolutionState, solve, time_step)

__all__ = [
    "Diverged", "ElasticParams", "Grid2D", "HamiltonianKind", "IterationStats", "NotConverged",
    "PointCategory", "ProblemSpec", "SchemeConfig", "SchemeKind", "SolutionState", "WeightParams",
    "classify_points", "extrapolate_derivative_ghosts", "extrapolate_ghosts", "get_problem",
    "masked_error", "pwave_reference", "registry", "solve", "time_step",
]

__version__ = "0.1.0"
