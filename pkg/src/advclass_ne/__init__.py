"""Exact Nash equilibria of adversarial classification games.

The defender labels attack vectors; the attacker picks one to maximize
reward minus expected detection cost.  Equilibria are computed in closed
form on the reward-level game with threshold classifiers and certified
against an LP oracle.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import AdvClassError, ConsistencyError, InputError, ModelAssumptionError, SolverError
from .game import (
    AttackVector,
    Classifier,
    GameSpec,
    MixedStrategy,
    attacker_best_response,
    defender_best_response,
    mixed_payoffs,
    pure_payoffs,
)
from .reduction import ReducedGame, ThresholdClassifier, detection_profile, expand_alpha, mixture_from_profile, reduce
from .solver import EquilibriumSet, build_matrices, compute_all_ne, compute_beta, tie_compare
from .oracle import full_game_value, solve_attacker_dual, solve_defender_lp, verify_ne
from .experiments import BinomialNoiseSpec, binomial_game, multi_feature_study, sweep

__all__ = [
    "AdvClassError",
    "AttackVector",
    "BinomialNoiseSpec",
    "Classifier",
    "ConsistencyError",
    "EquilibriumSet",
    "GameSpec",
    "InputError",
    "MixedStrategy",
    "ModelAssumptionError",
    "ReducedGame",
    "SolverError",
    "ThresholdClassifier",
    "attacker_best_response",
    "binomial_game",
    "build_matrices",
    "compute_all_ne",
    "compute_beta",
    "defender_best_response",
    "detection_profile",
    "expand_alpha",
    "full_game_value",
    "mixed_payoffs",
    "mixture_from_profile",
    "multi_feature_study",
    "pure_payoffs",
    "reduce",
    "solve_attacker_dual",
    "solve_defender_lp",
    "sweep",
    "tie_compare",
    "verify_ne",
]
