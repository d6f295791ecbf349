"""Multiplicative-weights apprenticeship learning over occupancy features.

The learner plays a zero-sum game: an adversary keeps weights ``w`` on the
feature simplex, the learner best-responds with the greedy optimal policy
for the reward ``w``. Payoffs are the normalised occupancy advantages
``(1 - gamma) (x_pi - x_demo)``. The output is the uniform mixture over the
per-round best responses.

Features are indicator features. A demonstrator occupancy of shape ``(S,)``
selects per-state features (reward ``w(s)`` for every action); shape
``(S, A)`` selects per-(state, action) features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..mdp import (
    DEFAULT_TOL,
    ControlledMarkovProcess,
    Mdp,
    RewardModel,
    greedy_policy,
    l1_loss,
    policy_value,
    solve_optimal_q,
)
from .estimates import discounted_state_occupancy

DEFAULT_ACCURACY = 1e-3
DEFAULT_MAX_ROUNDS = 2000


@dataclass
class MixedPolicy:
    """Policy chosen once at the start with probability ``weights[i]``."""

    policies: list
    weights: np.ndarray
    n_rounds: int = 0
    learning_rate: float = 1.0
    slack: float = float("nan")
    weight_history: list = field(default_factory=list, repr=False)

    def occupancy(self, cmp, discount) -> np.ndarray:
        return sum(w * discounted_state_occupancy(cmp, p, discount) for p, w in zip(self.policies, self.weights))

    def state_action_occupancy(self, cmp, discount) -> np.ndarray:
        return sum(w * state_action_occupancy(cmp, p, discount) for p, w in zip(self.policies, self.weights))

    def loss(self, mdp: Mdp, tol=DEFAULT_TOL) -> float:
        return float(sum(w * l1_loss(mdp, p, tol) for p, w in zip(self.policies, self.weights)))

    def expected_value(self, mdp: Mdp, tol=DEFAULT_TOL) -> float:
        """Start-distribution value of the mixture."""
        return float(sum(w * mdp.cmp.initial_dist @ policy_value(mdp, p, tol) for p, w in zip(self.policies, self.weights)))


def state_action_occupancy(cmp, policy, discount, initial=None) -> np.ndarray:
    x = discounted_state_occupancy(cmp, policy, discount, initial=initial)
    return x[:, None] * policy.action_prob


def mwal_schedule(accuracy, n_features, max_rounds=None):
    """Round count ``ceil(4 ln k / accuracy^2)`` (optionally capped) and the
    matching multiplicative factor ``1 / (1 + sqrt(2 ln k / N))``."""
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    log_k = math.log(n_features) if n_features > 1 else 0.0
    n_rounds = max(1, math.ceil(4.0 * log_k / accuracy**2))
    if max_rounds is not None:
        n_rounds = min(n_rounds, int(max_rounds))
    beta = 1.0 / (1.0 + math.sqrt(2.0 * log_k / n_rounds))
    return n_rounds, beta


def mwal(
    cmp: ControlledMarkovProcess,
    discount: float,
    demo_occupancy: np.ndarray,
    accuracy: float = DEFAULT_ACCURACY,
    rng=None,
    max_rounds: int | None = DEFAULT_MAX_ROUNDS,
    tie_tol: float = 1e-9,
    q_tol: float = DEFAULT_TOL,
    record_weights: bool = False,
) -> MixedPolicy:
    # Deterministic given its inputs; ``rng`` is accepted for interface
    # uniformity with the other methods.
    n, n_a = cmp.n_states, cmp.n_actions
    x_demo = np.asarray(demo_occupancy, dtype=np.float64)
    if x_demo.shape == (n,):
        occ_fn = discounted_state_occupancy

        def reward_of(w):
            return np.repeat(w[:, None], n_a, axis=1)

    elif x_demo.shape == (n, n_a):
        occ_fn = state_action_occupancy

        def reward_of(w):
            return w

    else:
        raise ValueError("demo_occupancy must have shape (S,) or (S, A)")
    n_rounds, beta = mwal_schedule(accuracy, x_demo.size, max_rounds)
    log_beta = math.log(beta)

    w = np.full(x_demo.shape, 1.0 / x_demo.size)
    seen = {}
    counts = []
    policies = []
    occupancies = []
    history = []
    for _ in range(n_rounds):
        if record_weights:
            history.append(w.copy())
        reward = RewardModel(reward_of(w))
        q = solve_optimal_q(Mdp(cmp, reward, discount), q_tol)
        pol = greedy_policy(q, tie_tol)
        key = pol.action_prob.tobytes()
        if key not in seen:
            seen[key] = len(policies)
            policies.append(pol)
            occupancies.append(occ_fn(cmp, pol, discount))
            counts.append(0)
        j = seen[key]
        counts[j] += 1
        gain = ((1.0 - discount) * (occupancies[j] - x_demo) + 2.0) / 4.0
        w = w * np.exp(log_beta * gain)
        w /= w.sum()
    if record_weights:
        history.append(w.copy())

    weights = np.array(counts, dtype=np.float64) / n_rounds
    x_mix = np.tensordot(weights, np.array(occupancies), axes=1)
    slack = float(((1.0 - discount) * (x_mix - x_demo)).min())
    return MixedPolicy(policies, weights, n_rounds, beta, slack, history)
