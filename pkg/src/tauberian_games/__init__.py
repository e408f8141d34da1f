"""Cesaro and Abel value maps on finite dynamic systems, with Tauberian diagnostics."""

from .model import Strategy, TrajectoryBundle, TransitionSystem, validate_model
from .payoff import Abel, Affine, Cesaro, Xi, Zeta
from .trajectory import Trajectory, concatenate, shift, state_at, unroll
from .valuemap import (
    BestValueMap,
    GameValueMap,
    StrategyValueMap,
    ValueFunction,
    apply_value_map,
    mean_payoff_limit,
)

__all__ = [
    "Abel",
    "Affine",
    "BestValueMap",
    "Cesaro",
    "GameValueMap",
    "Strategy",
    "StrategyValueMap",
    "Trajectory",
    "TrajectoryBundle",
    "TransitionSystem",
    "ValueFunction",
    "Xi",
    "Zeta",
    "apply_value_map",
    "concatenate",
    "mean_payoff_limit",
    "shift",
    "state_at",
    "unroll",
    "validate_model",
]
