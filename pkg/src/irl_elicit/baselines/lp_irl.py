"""Linear-programming IRL with a state-only reward.

Given a reference action ``a*(s)`` per state, find ``R in [0, r_max]^S``
maximising the summed smallest value gap between ``a*(s)`` and every other
action, minus an L1 penalty on ``R``, subject to ``a*`` staying optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mdp import ControlledMarkovProcess, Policy, RewardModel
from .simplex import LPResult, simplex_max

DEFAULT_PENALTY = 1.05
DEFAULT_R_MAX = 1.0


@dataclass
class LPIRLSolution:
    reward: RewardModel
    state_reward: np.ndarray
    objective: float
    reference_actions: np.ndarray
    # gap_rows[s, a] @ R is the value advantage of a*(s) over a in state s
    gap_rows: np.ndarray
    lp: LPResult

    def gaps(self) -> np.ndarray:
        g = self.gap_rows @ self.state_reward
        g[np.arange(len(g)), self.reference_actions] = np.inf
        return g


def reference_actions(policy: Policy) -> np.ndarray:
    """Per-state argmax, lowest index on ties."""
    return np.argmax(policy.action_prob, axis=1)


def gap_rows(cmp: ControlledMarkovProcess, discount, actions) -> np.ndarray:
    n = cmp.n_states
    t = cmp.transitions
    p_star = t[np.arange(n), actions]
    inv = np.linalg.inv(np.eye(n) - discount * p_star)
    return np.einsum("sat,tu->sau", p_star[:, None, :] - t, inv)


def solve_lp_irl(cmp: ControlledMarkovProcess, discount, policy: Policy, penalty=DEFAULT_PENALTY, r_max=DEFAULT_R_MAX) -> LPIRLSolution:
    if penalty < 0:
        raise ValueError("penalty must be non-negative")
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    n, n_a = cmp.n_states, cmp.n_actions
    astar = reference_actions(policy)
    rows = gap_rows(cmp, discount, astar)

    # variables: R (n), t (n)
    a_ub, b_ub = [], []
    for s in range(n):
        others = [a for a in range(n_a) if a != astar[s]]
        if not others:
            e = np.zeros(2 * n)
            e[n + s] = 1.0
            a_ub.append(e)
            b_ub.append(0.0)
        for a in others:
            g = rows[s, a]
            a_ub.append(np.concatenate([-g, np.zeros(n)]))
            b_ub.append(0.0)
            e = np.zeros(n)
            e[s] = 1.0
            a_ub.append(np.concatenate([-g, e]))
            b_ub.append(0.0)
    for s in range(n):
        e = np.zeros(2 * n)
        e[s] = 1.0
        a_ub.append(e)
        b_ub.append(r_max)
    c = np.concatenate([np.full(n, -penalty), np.ones(n)])
    res = simplex_max(c, np.array(a_ub), np.array(b_ub))
    r_state = np.clip(res.x[:n], 0.0, r_max)
    table = np.repeat(r_state[:, None], n_a, axis=1)
    # RewardModel entries live in [0, 1]
    reward = RewardModel(table / max(r_max, 1.0))
    return LPIRLSolution(reward, r_state, res.objective, astar, rows, res)


def lp_irl(cmp: ControlledMarkovProcess, discount, policy: Policy, penalty=DEFAULT_PENALTY, r_max=DEFAULT_R_MAX) -> RewardModel:
    return solve_lp_irl(cmp, discount, policy, penalty, r_max).reward
