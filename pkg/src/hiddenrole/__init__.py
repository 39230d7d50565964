"""Equilibrium values of hidden-role games via a mediated zero-sum reduction."""

__version__ = "0.1.0"

from .efg import (MAX, MIN, BehavioralStrategy, GameError, GameTree,
                  StrategyIncompleteError, TreeBuilder, best_response, counts,
                  expected_value, exploitability, validate)

__all__ = [
    "MAX", "MIN", "BehavioralStrategy", "GameError", "GameTree",
    "StrategyIncompleteError", "TreeBuilder", "best_response", "counts",
    "expected_value", "exploitability", "validate", "__version__",
]
