"""Normalized Nash equilibria of nonconvex generalized games by cutting planes."""

from .cutting_plane import (
    CutSet,
    SolveReport,
    SolverConfig,
    Status,
    initialize_cuts_joint,
    solve_lower_bounding,
    solve_lower_level,
    solve_mnd,
)
from .game import (
    FiniteGame,
    GameInstance,
    Measure,
    aggregate_objective,
    is_feasible,
    normalized_disequilibrium,
    per_player_disequilibrium,
)
from .knapsack import KnapsackGame, KnapsackInstance, brute_force_mnd, generate_instance, verify_gne

__version__ = "0.1.0"

__all__ = [
    "CutSet",
    "FiniteGame",
    "GameInstance",
    "KnapsackGame",
    "KnapsackInstance",
    "Measure",
    "SolveReport",
    "SolverConfig",
    "Status",
    "aggregate_objective",
    "brute_force_mnd",
    "generate_instance",
    "initialize_cuts_joint",
    "is_feasible",
    "normalized_disequilibrium",
    "per_player_disequilibrium",
    "solve_lower_bounding",
    "solve_lower_level",
    "solve_mnd",
    "verify_gne",
]
