"""Demonstrated-policy estimates and discounted state occupancy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mdp import ControlledMarkovProcess, Policy, Trajectory


@dataclass(frozen=True)
class PolicyEstimate:
    policy: Policy
    visit_counts: np.ndarray


def visit_counts(traj: Trajectory, n_states, n_actions) -> np.ndarray:
    traj.check_bounds(n_states, n_actions)
    counts = np.zeros((n_states, n_actions), dtype=np.int64)
    np.add.at(counts, (traj.states, traj.actions), 1)
    return counts


def ml_policy_estimate(traj: Trajectory, n_states, n_actions) -> PolicyEstimate:
    """Empirical action frequencies; unvisited states get a uniform row."""
    counts = visit_counts(traj, n_states, n_actions)
    totals = counts.sum(axis=1, keepdims=True)
    table = np.where(totals > 0, counts / np.maximum(totals, 1), 1.0 / n_actions)
    return PolicyEstimate(Policy(table), counts)


def laplace_policy_estimate(traj: Trajectory, n_states, n_actions) -> PolicyEstimate:
    """Posterior mean under a Dirichlet(1, ..., 1) prior per state."""
    counts = visit_counts(traj, n_states, n_actions)
    table = (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + n_actions)
    return PolicyEstimate(Policy(table), counts)


def induced_chain(cmp: ControlledMarkovProcess, policy: Policy) -> np.ndarray:
    """State-to-state transition matrix under ``policy``."""
    return np.einsum("sa,sat->st", policy.action_prob, cmp.transitions)


def discounted_state_occupancy(
    cmp: ControlledMarkovProcess,
    policy: Policy,
    discount,
    method="solve",
    initial=None,
    tol=1e-9,
    max_iter=1_000_000,
) -> np.ndarray:
    """``x = sum_t discount^(t-1) d_t`` with ``d_1 = initial`` and
    ``d_{t+1} = d_t P_pi``. Entries sum to ``1 / (1 - discount)``.

    ``method="solve"`` solves ``(I - discount P_pi^T) x = d_1`` directly;
    ``method="iterate"`` runs the fixed-point recursion to ``tol``.
    """
    d1 = cmp.initial_dist if initial is None else np.asarray(initial, dtype=np.float64)
    p = induced_chain(cmp, policy)
    if method == "solve":
        x = np.linalg.solve(np.eye(cmp.n_states) - discount * p.T, d1)
        return np.maximum(x, 0.0)
    if method != "iterate":
        raise ValueError(f"unknown method {method!r}")
    x = d1.copy()
    for _ in range(max_iter):
        x_new = d1 + discount * (x @ p)
        if np.abs(x_new - x).max() <= tol * (1.0 - discount):
            return x_new
        x = x_new
    raise RuntimeError("occupancy iteration did not converge")
