"""Inexact penalty-SLP solver for small nonlinear programs.

The outer loop minimizes the l1 exact penalty rho*f + v with trust-region
linear models; each model is solved inexactly by a dense primal simplex that
stops as soon as cheap primal/dual ratio tests certify enough progress, and
lowers rho inside the solve when feasibility progress lags.
"""

from .catalog import CatalogEntry, catalog
from .problem import Constraint, Evaluation, EvaluationError, Kind, Problem, check_gradients, evaluate
from .solver import IterationRecord, SolveReport, SolverConfig, Status, StepType, solve

__all__ = [
    "CatalogEntry", "Constraint", "Evaluation", "EvaluationError", "IterationRecord", "Kind",
    "Problem", "SolveReport", "SolverConfig", "Status", "StepType", "catalog", "check_gradients",
    "evaluate", "solve",
]
__version__ = "0.1.0"
