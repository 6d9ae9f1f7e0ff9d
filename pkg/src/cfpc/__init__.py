"""Predictor-corrector solvers for Caputo-Fabrizio fractional equations.

Quick start::

    from cfpc import builtin_problem, TimeGrid, solve_fpq, error_metrics

    problem = builtin_problem("ex1", alpha=0.5)
    traj = solve_fpq(problem, TimeGrid(1.0, 80))
    print(error_metrics(traj, problem.exact).e_max)
"""
from .errors import (AssemblyError, CFError, ConvergenceError, DimensionError, DomainError,
                     EvaluationError, SingularMatrixError, StateError, UsageError)
from .fast import MemoryState, memory_update, solve_fpl, solve_fpq
from .pde import (ErrorTracker, FieldHistory, PdeProblem, SpaceGrid, TridiagonalSystem,
                  assemble_step, builtin_pde_problem, solve_pde, thomas_solve)
from .problem import (FractionalSetup, OdeProblem, TimeGrid, Trajectory, builtin_problem,
                      g_eval, kernel_transform, make_setup)
from .stepper import StartupValues, solve_cpl, solve_cpq, startup
from .verification import (ErrorReport, PdeErrorReport, dense_solve, error_metrics,
                           memory_oracle, quadrature_oracle, rate_of_convergence)
from .weights import (WeightRow, WeightTable, first_interval_weights, hat_weight,
                      linear_weights, phi, quadratic_weights)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "CFError", "ConvergenceError", "DimensionError", "DomainError",
    "ErrorReport", "ErrorTracker", "EvaluationError", "FieldHistory", "FractionalSetup",
    "MemoryState", "OdeProblem", "PdeErrorReport", "PdeProblem", "SingularMatrixError",
    "SpaceGrid", "StartupValues", "StateError", "TimeGrid", "Trajectory", "TridiagonalSystem",
    "UsageError", "WeightRow", "WeightTable", "assemble_step", "builtin_pde_problem",
    "builtin_problem", "dense_solve", "error_metrics", "first_interval_weights", "g_eval",
    "hat_weight", "kernel_transform", "linear_weights", "make_setup", "memory_oracle",
    "memory_update", "phi", "quadratic_weights", "quadrature_oracle", "rate_of_convergence",
    "solve_cpl", "solve_cpq", "solve_fpl", "solve_fpq", "solve_pde", "startup", "thomas_solve",
]
