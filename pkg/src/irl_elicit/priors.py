"""Priors over reward tables and the softmax inverse temperature.

Two reward-prior families share one duck-typed surface (``sample``,
``updated``, ``log_density``, ``mean``):

* ``BetaProductPrior`` - independent Beta per (state, action); conjugate
  to Bernoulli rewards.
* ``GridRewardPrior`` - independent discrete distribution on a fixed grid of
  success probabilities per (state, action). Also Bernoulli-conjugate, and
  small enough to enumerate, which is what the posterior oracles use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .mdp import RewardModel


@dataclass(frozen=True)
class BetaProductPrior:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        b = np.asarray(self.beta, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 2:
            raise ValueError("alpha and beta must be (S, A) tables of equal shape")
        if not (np.all(a > 0) and np.all(b > 0)):
            raise ValueError("Beta parameters must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def constant(cls, n_states, n_actions, alpha=1.0, beta=1.0):
        shape = (n_states, n_actions)
        return cls(np.full(shape, float(alpha)), np.full(shape, float(beta)))

    @property
    def shape(self):
        return self.alpha.shape

    def sample(self, rng: np.random.Generator) -> RewardModel:
        return RewardModel(rng.beta(self.alpha, self.beta))

    def updated(self, successes, failures) -> BetaProductPrior:
        return BetaProductPrior(self.alpha + successes, self.beta + failures)

    def log_density(self, reward: RewardModel) -> float:
        p = reward.success_prob
        with np.errstate(divide="ignore"):
            terms = (
                special.xlogy(self.alpha - 1.0, p)
                + special.xlog1py(self.beta - 1.0, -p)
                - special.betaln(self.alpha, self.beta)
            )
        return float(terms.sum())

    def mean(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class GridRewardPrior:
    """Independent categorical prior over ``points`` for every (s, a) entry.

    ``log_weights[s, a, k]`` need not be normalised.
    """

    points: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        lw = np.asarray(self.log_weights, dtype=np.float64)
        if pts.ndim != 1 or not np.all((pts >= 0) & (pts <= 1)):
            raise ValueError("grid points must be a 1-d array in [0, 1]")
        if lw.ndim != 3 or lw.shape[2] != pts.size:
            raise ValueError("log_weights must have shape (S, A, n_points)")
        lw = lw - special.logsumexp(lw, axis=2, keepdims=True)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def from_beta(cls, n_states, n_actions, n_points=9, alpha=1.0, beta=1.0):
        """Bin-midpoint grid weighted by the Beta(alpha, beta) mass of each bin."""
        edges = np.linspace(0.0, 1.0, n_points + 1)
        points = 0.5 * (edges[:-1] + edges[1:])
        mass = np.diff(special.betainc(alpha, beta, edges))
        lw = np.broadcast_to(np.log(mass), (n_states, n_actions, n_points)).copy()
        return cls(points, lw)

    @property
    def shape(self):
        return self.log_weights.shape[:2]

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def sample_indices(self, rng: np.random.Generator) -> np.ndarray:
        cdf = np.cumsum(self.probabilities(), axis=2)
        u = rng.random(self.shape)
        idx = (u[..., None] > cdf).sum(axis=2)
        return np.minimum(idx, self.points.size - 1)

    def sample(self, rng: np.random.Generator) -> RewardModel:
        return RewardModel(self.points[self.sample_indices(rng)])

    def updated(self, successes, failures) -> GridRewardPrior:
        s = np.asarray(successes, dtype=np.float64)[..., None]
        f = np.asarray(failures, dtype=np.float64)[..., None]
        with np.errstate(divide="ignore"):
            lw = self.log_weights + special.xlogy(s, self.points) + special.xlog1py(f, -self.points)
        return GridRewardPrior(self.points, lw)

    def index_of(self, reward: RewardModel) -> np.ndarray:
        p = reward.success_prob
        idx = np.abs(p[..., None] - self.points).argmin(axis=2)
        if not np.allclose(self.points[idx], p, atol=1e-12):
            raise ValueError("reward table is not supported on the grid")
        return idx

    def log_density(self, reward: RewardModel) -> float:
        idx = self.index_of(reward)
        return float(np.take_along_axis(self.log_weights, idx[..., None], axis=2).sum())

    def mean(self) -> np.ndarray:
        return (self.probabilities() * self.points).sum(axis=2)


@dataclass(frozen=True)
class GammaPrior:
    """Gamma prior on the inverse temperature, parameterised by shape and rate."""

    shape: float = 2.0
    rate: float = 0.5

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("Gamma shape and rate must be positive")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.gamma(self.shape, 1.0 / self.rate))

    def log_density(self, eta: float) -> float:
        if eta <= 0:
            return -np.inf
        return float(
            self.shape * np.log(self.rate)
            - special.gammaln(self.shape)
            + (self.shape - 1.0) * np.log(eta)
            - self.rate * eta
        )

    def quadrature(self, n_points=20):
        """Nodes and normalised weights for expectations under this prior."""
        x, w = special.roots_genlaguerre(n_points, self.shape - 1.0)
        return x / self.rate, w / w.sum()
