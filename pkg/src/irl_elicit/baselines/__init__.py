"""Comparison IRL methods: LP-based IRL, PolicyWalk-style Bayesian IRL, and
multiplicative-weights apprenticeship learning."""

from .estimates import (
    PolicyEstimate,
    discounted_state_occupancy,
    laplace_policy_estimate,
    ml_policy_estimate,
)
from .lp_irl import LPIRLSolution, lp_irl, solve_lp_irl
from .mwal import MixedPolicy, mwal, mwal_schedule, state_action_occupancy
from .policy_walk import policy_walk_chain
from .simplex import LPError, LPResult, UnboundedError, simplex_max

__all__ = [
    "LPError",
    "LPIRLSolution",
    "LPResult",
    "MixedPolicy",
    "PolicyEstimate",
    "UnboundedError",
    "discounted_state_occupancy",
    "laplace_policy_estimate",
    "lp_irl",
    "ml_policy_estimate",
    "mwal",
    "mwal_schedule",
    "policy_walk_chain",
    "simplex_max",
    "solve_lp_irl",
    "state_action_occupancy",
]
