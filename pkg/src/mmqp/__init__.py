"""Dual active-set solver for minimax quadratic programs with coupled constraints."""
from .errors import (
    InputError,
    IterationLimitExceeded,
    MMQPError,
)
from .generator import GenSpec, PlantedInstance, generate
from .kernels import BACKEND
from .problem import MinimaxQP, check_assumption2, load_problem, save_problem
from .solver import SolveOutcome, solve
from .verify import enumerate_spairs, gamma_matrix, verify_spair

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "GenSpec", "InputError", "IterationLimitExceeded", "MMQPError",
    "MinimaxQP", "PlantedInstance", "SolveOutcome", "check_assumption2",
    "enumerate_spairs", "gamma_matrix", "generate", "load_problem", "save_problem",
    "solve", "verify_spair",
]
