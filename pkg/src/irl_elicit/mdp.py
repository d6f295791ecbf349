"""Tabular MDP primitives: environment, reward, policy, trajectory, and the
value computations everything else is built on.

Rewards are Bernoulli in {0, 1}; ``RewardModel.success_prob`` is both the
Bernoulli parameter table and the expected reward table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

PROB_ATOL = 1e-9
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100_000
DEFAULT_TIE_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Iterative solver hit its sweep cap before reaching the tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


def _check_distribution_rows(arr, name):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if arr.size and arr.min() < 0.0:
        raise ValueError(f"{name} has negative entries")
    err = np.abs(arr.sum(axis=-1) - 1.0)
    if err.size and err.max() > PROB_ATOL:
        raise ValueError(f"{name} rows must sum to 1 (max error {err.max():.2e})")


@dataclass(frozen=True)
class ControlledMarkovProcess:
    """Known dynamics: ``transitions[s, a, s']`` and the start distribution."""

    transitions: np.ndarray
    initial_dist: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.transitions, dtype=np.float64)
        d = np.ascontiguousarray(self.initial_dist, dtype=np.float64)
        if t.ndim != 3 or t.shape[0] != t.shape[2] or t.shape[0] < 1 or t.shape[1] < 1:
            raise ValueError(f"transitions must have shape (S, A, S), got {t.shape}")
        if d.shape != (t.shape[0],):
            raise ValueError("initial_dist must have one entry per state")
        _check_distribution_rows(t, "transitions")
        _check_distribution_rows(d, "initial_dist")
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "initial_dist", d)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]


@dataclass(frozen=True)
class RewardModel:
    success_prob: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.success_prob, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("success_prob must be a (S, A) table")
        if not np.all((p >= 0.0) & (p <= 1.0)):
            raise ValueError("success_prob entries must lie in [0, 1]")
        object.__setattr__(self, "success_prob", p)

    @property
    def mean(self) -> np.ndarray:
        """Expected reward table; equal to the success probabilities."""
        return self.success_prob


@dataclass(frozen=True)
class Mdp:
    cmp: ControlledMarkovProcess
    reward: RewardModel
    discount: float

    def __post_init__(self):
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {self.discount}")
        if self.reward.success_prob.shape != (self.cmp.n_states, self.cmp.n_actions):
            raise ValueError("reward table shape does not match the process")

    @property
    def n_states(self) -> int:
        return self.cmp.n_states

    @property
    def n_actions(self) -> int:
        return self.cmp.n_actions


@dataclass(frozen=True)
class Policy:
    """Stochastic action-selection table ``action_prob[s, a]``."""

    action_prob: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.action_prob, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("action_prob must be a (S, A) table")
        _check_distribution_rows(p, "action_prob")
        object.__setattr__(self, "action_prob", p)

    @property
    def n_states(self) -> int:
        return self.action_prob.shape[0]

    @property
    def n_actions(self) -> int:
        return self.action_prob.shape[1]

    @classmethod
    def uniform(cls, n_states, n_actions):
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def deterministic(cls, actions, n_actions):
        actions = np.asarray(actions, dtype=np.int64)
        table = np.zeros((actions.size, n_actions))
        table[np.arange(actions.size), actions] = 1.0
        return cls(table)


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray | None = field(default=None)

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64).reshape(-1)
        a = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        if s.shape != a.shape:
            raise ValueError("states and actions must have equal length")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "actions", a)
        if self.rewards is not None:
            r = np.asarray(self.rewards, dtype=np.int64).reshape(-1)
            if r.shape != s.shape:
                raise ValueError("rewards must have the same length as states")
            if r.size and not np.all((r == 0) | (r == 1)):
                raise ValueError("rewards must be 0/1")
            object.__setattr__(self, "rewards", r)

    def __len__(self):
        return self.states.size

    def concat(self, other: Trajectory) -> Trajectory:
        rewards = None
        if self.rewards is not None and other.rewards is not None:
            rewards = np.concatenate([self.rewards, other.rewards])
        return Trajectory(
            np.concatenate([self.states, other.states]),
            np.concatenate([self.actions, other.actions]),
            rewards,
        )

    def check_bounds(self, n_states, n_actions):
        if len(self) == 0:
            return
        if self.states.min() < 0 or self.states.max() >= n_states:
            raise IndexError("trajectory state index out of range")
        if self.actions.min() < 0 or self.actions.max() >= n_actions:
            raise IndexError("trajectory action index out of range")


# ---------------------------------------------------------------------------
# value computations
# ---------------------------------------------------------------------------


def _stop_threshold(tol, discount):
    # ||Q_{k+1} - Q_k|| <= tol (1-g)/g bounds both the Bellman residual of
    # Q_{k+1} and its distance to the fixed point by tol.
    if tol <= 0:
        raise ValueError("tol must be positive")
    if discount == 0.0:
        return np.inf
    return tol * (1.0 - discount) / discount


def solve_optimal_q(mdp: Mdp, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> np.ndarray:
    """Optimal Q table by value iteration.

    The returned table has sup-norm Bellman residual at most ``tol`` and is
    also within ``tol`` of the exact fixed point. Raises ``ConvergenceError``
    if ``max_iter`` sweeps are not enough.
    """
    stop = _stop_threshold(tol, mdp.discount)
    q, delta, _ = _kernels.optimal_q(
        mdp.cmp.transitions, mdp.reward.success_prob, float(mdp.discount), stop, int(max_iter)
    )
    if delta > stop:
        raise ConvergenceError("value iteration did not converge", delta)
    return q


def evaluate_policy_q(mdp: Mdp, policy: Policy, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> np.ndarray:
    if policy.action_prob.shape != (mdp.n_states, mdp.n_actions):
        raise ValueError(
            f"policy shape {policy.action_prob.shape} does not match MDP "
            f"({mdp.n_states}, {mdp.n_actions})"
        )
    stop = _stop_threshold(tol, mdp.discount)
    q, delta, _ = _kernels.policy_q(
        mdp.cmp.transitions,
        mdp.reward.success_prob,
        policy.action_prob,
        float(mdp.discount),
        stop,
        int(max_iter),
    )
    if delta > stop:
        raise ConvergenceError("policy evaluation did not converge", delta)
    return q


def policy_value(mdp: Mdp, policy: Policy, tol=DEFAULT_TOL) -> np.ndarray:
    q = evaluate_policy_q(mdp, policy, tol)
    return (policy.action_prob * q).sum(axis=1)


def bellman_residual(mdp: Mdp, q: np.ndarray) -> float:
    v = q.max(axis=1)
    backed = mdp.reward.success_prob + mdp.discount * (mdp.cmp.transitions @ v)
    return float(np.abs(backed - q).max())


def softmax_policy(q: np.ndarray, eta: float) -> Policy:
    if eta < 0:
        raise ValueError("eta must be non-negative")
    z = eta * (q - q.max(axis=1, keepdims=True))
    w = np.exp(z)
    w /= w.sum(axis=1, keepdims=True)
    return Policy(w)


def greedy_policy(q: np.ndarray, tie_tol=DEFAULT_TIE_TOL) -> Policy:
    """Uniform over actions within ``tie_tol`` of the row maximum."""
    if tie_tol < 0:
        raise ValueError("tie_tol must be non-negative")
    best = q >= q.max(axis=1, keepdims=True) - tie_tol
    w = best.astype(np.float64)
    w /= w.sum(axis=1, keepdims=True)
    return Policy(w)


def trajectory_log_likelihood(policy: Policy, traj: Trajectory) -> float:
    """Sum of log action probabilities along the trajectory.

    Transition probabilities do not depend on the policy and are left out.
    Returns ``-inf`` when any observed action has probability zero.
    """
    if len(traj) == 0:
        return 0.0
    traj.check_bounds(policy.n_states, policy.n_actions)
    p = policy.action_prob[traj.states, traj.actions]
    if p.min() <= 0.0:
        return -np.inf
    return float(np.log(p).sum())


def l1_loss(mdp: Mdp, policy: Policy, tol=DEFAULT_TOL) -> float:
    """Sum over states of ``V*(s) - V^pi(s)``, per-state clamped at zero."""
    v_star = solve_optimal_q(mdp, tol).max(axis=1)
    v_pi = policy_value(mdp, policy, tol)
    return float(np.maximum(v_star - v_pi, 0.0).sum())
