"""Strategyproof two-facility location on a discrete line."""

from twofacility.core import (
    BOTH,
    F1,
    F2,
    NONE,
    Agent,
    ApprovalPair,
    InstanceError,
    LineInstance,
    Objective,
    Solution,
    agent_cost,
    max_cost,
    mirror_instance,
    objective_value,
    occupied_window,
    social_cost,
)
from twofacility.mechanisms import MechanismId, parse_mechanism
from twofacility.oracle import OptResult, optimal_cost

__all__ = [
    "BOTH",
    "F1",
    "F2",
    "NONE",
    "Agent",
    "ApprovalPair",
    "InstanceError",
    "LineInstance",
    "MechanismId",
    "Objective",
    "OptResult",
    "Solution",
    "agent_cost",
    "max_cost",
    "mirror_instance",
    "objective_value",
    "occupied_window",
    "optimal_cost",
    "parse_mechanism",
    "social_cost",
]
