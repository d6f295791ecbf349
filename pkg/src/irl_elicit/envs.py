"""Benchmark domains, reward sampling, demonstrators and simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from .mdp import (
    DEFAULT_TOL,
    ControlledMarkovProcess,
    Mdp,
    Policy,
    RewardModel,
    Trajectory,
    softmax_policy,
    solve_optimal_q,
)
from .priors import BetaProductPrior

DEFAULT_RETRY_CAP = 1000

# compass actions: (row delta, column delta)
MOVES = ((-1, 0), (0, 1), (1, 0), (0, -1))
ACTION_NAMES = ("north", "east", "south", "west")


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its retry cap."""


def is_communicating(transitions: np.ndarray) -> bool:
    """Strong connectivity of the graph with an edge s -> s' whenever some
    action reaches s' from s with positive probability."""
    adj = (transitions > 0).any(axis=1)
    n, _ = csgraph.connected_components(adj.astype(np.int8), directed=True, connection="strong")
    return n == 1


def sample_random_mdp(n_states, n_actions=4, rng=None, retry_cap=DEFAULT_RETRY_CAP) -> ControlledMarkovProcess:
    """Each (s, a) reaches a random quarter of the states (ceil(S/4) of them)
    with uniform-then-normalised arrival probabilities. Resampled until the
    process is communicating."""
    if n_states < 4:
        raise ValueError("random MDPs need at least 4 states")
    if n_actions < 1:
        raise ValueError("need at least one action")
    rng = np.random.default_rng(rng)
    k = math.ceil(n_states / 4)
    for _ in range(retry_cap):
        t = np.zeros((n_states, n_actions, n_states))
        for s in range(n_states):
            for a in range(n_actions):
                dest = rng.choice(n_states, size=k, replace=False)
                w = rng.random(k)
                t[s, a, dest] = w / w.sum()
        if is_communicating(t):
            return ControlledMarkovProcess(t, np.full(n_states, 1.0 / n_states))
    raise GenerationError(f"no communicating MDP after {retry_cap} attempts")


@dataclass(frozen=True)
class MazeSpec:
    width: int
    height: int
    walls: np.ndarray
    success_prob: float = 0.7
    wall_density: float = 0.25

    @property
    def free_cells(self) -> np.ndarray:
        """(row, col) of every free cell in state-index order (row-major)."""
        return np.argwhere(~self.walls)

    def state_index(self) -> np.ndarray:
        """Grid of state indices, -1 on walls."""
        idx = np.full(self.walls.shape, -1, dtype=np.int64)
        cells = self.free_cells
        idx[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
        return idx


def _free_cells_connected(walls):
    free = ~walls
    n_free = int(free.sum())
    if n_free == 0:
        return False
    h, w = walls.shape
    idx = np.full(walls.shape, -1)
    idx[free] = np.arange(n_free)
    rows, cols = [], []
    for r, c in np.argwhere(free):
        for dr, dc in MOVES:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and free[rr, cc]:
                rows.append(idx[r, c])
                cols.append(idx[rr, cc])
    adj = np.zeros((n_free, n_free), dtype=np.int8)
    adj[rows, cols] = 1
    n, _ = csgraph.connected_components(adj, directed=False)
    return n == 1


def maze_transitions(spec: MazeSpec) -> ControlledMarkovProcess:
    """Intended move succeeds with ``spec.success_prob`` (blocked moves stay
    put); otherwise the agent slips to a uniformly chosen adjacent free cell,
    or stays put when it has none."""
    h, w = spec.walls.shape
    idx = spec.state_index()
    cells = spec.free_cells
    n = len(cells)
    n_a = len(MOVES)
    t = np.zeros((n, n_a, n))
    for s, (r, c) in enumerate(cells):
        neighbours = []
        targets = []
        for dr, dc in MOVES:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and idx[rr, cc] >= 0:
                neighbours.append(idx[rr, cc])
                targets.append(idx[rr, cc])
            else:
                targets.append(s)
        for a in range(n_a):
            t[s, a, targets[a]] += spec.success_prob
            if neighbours:
                for s2 in neighbours:
                    t[s, a, s2] += (1.0 - spec.success_prob) / len(neighbours)
            else:
                t[s, a, s] += 1.0 - spec.success_prob
    return ControlledMarkovProcess(t, np.full(n, 1.0 / n))


def sample_maze(width, height, rng=None, success_prob=0.7, wall_density=0.25, retry_cap=DEFAULT_RETRY_CAP):
    """Random grid maze; returns ``(cmp, spec)``.

    Walls are i.i.d. Bernoulli(wall_density); mazes with more than
    ``width * height / 4`` walls or a disconnected free region are rejected.
    """
    if width * height < 4:
        raise ValueError("maze needs at least 4 cells")
    rng = np.random.default_rng(rng)
    max_walls = (width * height) // 4
    for _ in range(retry_cap):
        walls = rng.random((height, width)) < wall_density
        if walls.sum() > max_walls or not _free_cells_connected(walls):
            continue
        spec = MazeSpec(width, height, walls, success_prob, wall_density)
        return maze_transitions(spec), spec
    raise GenerationError(f"no admissible maze after {retry_cap} attempts")


def sample_reward(prior: BetaProductPrior, rng=None) -> RewardModel:
    return prior.sample(np.random.default_rng(rng))


def make_demonstrator(mdp: Mdp, eta, tol=DEFAULT_TOL) -> Policy:
    return softmax_policy(solve_optimal_q(mdp, tol), eta)


def simulate(cmp: ControlledMarkovProcess, reward: RewardModel, policy: Policy, horizon, rng=None) -> Trajectory:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    rng = np.random.default_rng(rng)
    states = np.empty(horizon, dtype=np.int64)
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.int64)
    if horizon == 0:
        return Trajectory(states, actions, rewards)
    # inverse-CDF draws against precomputed cumulative tables
    t_cdf = np.cumsum(cmp.transitions, axis=2)
    pi_cdf = np.cumsum(policy.action_prob, axis=1)
    u = rng.random((horizon, 3))
    last_s = cmp.n_states - 1
    last_a = cmp.n_actions - 1
    s = min(int(np.searchsorted(np.cumsum(cmp.initial_dist), rng.random(), side="right")), last_s)
    p = reward.success_prob
    for t in range(horizon):
        a = min(int(np.searchsorted(pi_cdf[s], u[t, 0], side="right")), last_a)
        states[t] = s
        actions[t] = a
        rewards[t] = 1 if u[t, 1] < p[s, a] else 0
        s = min(int(np.searchsorted(t_cdf[s, a], u[t, 2], side="right")), last_s)
    return Trajectory(states, actions, rewards)
