"""Interior point LP solvers with inexact, sketching-preconditioned linear algebra."""

from .driver import (IpmConfig, IterationRecord, IterationTrace, SolveOutcome,
                     run, run_corrected, run_exact, run_uncorrected)
from .harness import ExperimentPlan, figure_plan, generate_synthetic_lp, run_experiment
from .model import (LinearProgram, PrimalDualPoint, Residuals, duality_measure,
                    neighborhood_check, residuals)

__all__ = [
    "ExperimentPlan",
    "IpmConfig",
    "IterationRecord",
    "IterationTrace",
    "LinearProgram",
    "PrimalDualPoint",
    "Residuals",
    "SolveOutcome",
    "duality_measure",
    "figure_plan",
    "generate_synthetic_lp",
    "neighborhood_check",
    "residuals",
    "run",
    "run_corrected",
    "run_exact",
    "run_uncorrected",
    "run_experiment",
]

__version__ = "0.1.0"
