"""Posterior samplers over (reward table, inverse temperature).

``mh_chain`` proposes reward tables and temperatures independently from
their priors, so the prior terms cancel and acceptance depends only on the
trajectory log-likelihood of the induced softmax policy.

``gibbs_chain`` additionally carries a latent reward sequence. The reward
proposal is the prior conditioned on that sequence (conjugate update); the
sequence is redrawn from the accepted reward table every iteration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .mdp import (
    DEFAULT_TIE_TOL,
    DEFAULT_TOL,
    ConvergenceError,
    ControlledMarkovProcess,
    Mdp,
    Policy,
    RewardModel,
    Trajectory,
    greedy_policy,
    softmax_policy,
    solve_optimal_q,
    trajectory_log_likelihood,
)
from .priors import BetaProductPrior, GammaPrior

DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 10_000
    burn_in: int = 2_000
    thin: int = 1
    q_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not 0 <= self.burn_in < self.n_samples:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_samples")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.q_tol <= 0:
            raise ValueError("q_tol must be positive")

    @property
    def n_kept(self) -> int:
        return (self.n_samples - self.burn_in) // self.thin

    def keeps(self, k: int) -> bool:
        """Whether iteration ``k`` (1-based) is retained."""
        return k > self.burn_in and (k - self.burn_in) % self.thin == 0


@dataclass(frozen=True)
class JointSample:
    reward: RewardModel
    eta: float
    policy: Policy
    log_likelihood: float
    reward_sequence: np.ndarray | None = None


@dataclass
class Chain:
    """Retained samples plus a per-iteration trace of the accept decisions.

    ``proposed_log_likelihood[k]`` and ``current_log_likelihood[k]`` hold the
    proposal's score and the chain's score *before* iteration ``k + 1``;
    ``accepted[k]`` is the decision taken.
    """

    samples: list
    acceptance_rate: float
    config: SamplerConfig
    accepted: np.ndarray
    proposed_log_likelihood: np.ndarray
    current_log_likelihood: np.ndarray
    n_solver_failures: int = 0
    method: str = "mh"
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def reward_array(self) -> np.ndarray:
        return np.stack([smp.reward.success_prob for smp in self.samples])

    def eta_array(self) -> np.ndarray:
        return np.array([smp.eta for smp in self.samples])


def _accept(log_ratio, u):
    if math.isnan(log_ratio):
        return False
    return log_ratio >= 0.0 or u < math.exp(log_ratio)


def _score(cmp, discount, reward, eta, traj, q_tol):
    q = solve_optimal_q(Mdp(cmp, reward, discount), q_tol, DEFAULT_MAX_ITER)
    policy = softmax_policy(q, eta)
    return policy, trajectory_log_likelihood(policy, traj)


class _Recorder:
    def __init__(self, config):
        self.config = config
        n = config.n_samples
        self.accepted = np.zeros(n, dtype=bool)
        self.proposed = np.full(n, -np.inf)
        self.current = np.full(n, -np.inf)
        self.samples = []
        self.failures = 0

    def step(self, k, proposed_ll, current_ll, accepted, state):
        self.proposed[k - 1] = proposed_ll
        self.current[k - 1] = current_ll
        self.accepted[k - 1] = accepted
        if self.config.keeps(k):
            self.samples.append(state)

    def finish(self, method, **extras):
        if self.failures:
            warnings.warn(
                f"{method}: {self.failures} proposals rejected after solver non-convergence",
                RuntimeWarning,
                stacklevel=3,
            )
        return Chain(
            samples=self.samples,
            acceptance_rate=float(self.accepted.mean()),
            config=self.config,
            accepted=self.accepted,
            proposed_log_likelihood=self.proposed,
            current_log_likelihood=self.current,
            n_solver_failures=self.failures,
            method=method,
            extras=extras,
        )


def mh_chain(
    cmp: ControlledMarkovProcess,
    discount: float,
    reward_prior,
    temp_prior: GammaPrior,
    traj: Trajectory,
    config: SamplerConfig = SamplerConfig(),
    rng=None,
) -> Chain:
    """Independence Metropolis-Hastings with prior proposals."""
    rng = np.random.default_rng(rng)
    traj.check_bounds(cmp.n_states, cmp.n_actions)
    rec = _Recorder(config)

    state = None
    while state is None:
        reward = reward_prior.sample(rng)
        eta = temp_prior.sample(rng)
        try:
            policy, ll = _score(cmp, discount, reward, eta, traj, config.q_tol)
        except ConvergenceError:
            rec.failures += 1
            continue
        state = JointSample(reward, eta, policy, ll)

    for k in range(1, config.n_samples + 1):
        reward = reward_prior.sample(rng)
        eta = temp_prior.sample(rng)
        u = rng.random()
        try:
            policy, ll = _score(cmp, discount, reward, eta, traj, config.q_tol)
        except ConvergenceError:
            rec.failures += 1
            policy, ll = None, -np.inf
        current = state.log_likelihood
        ok = policy is not None and ll > -np.inf and _accept(ll - current, u)
        if ok:
            state = JointSample(reward, eta, policy, ll)
        rec.step(k, ll, current, ok, state)
    return rec.finish("mh")


def conjugate_beta_update(prior, traj: Trajectory, reward_seq) -> BetaProductPrior:
    """Condition a Bernoulli-conjugate reward prior on observed 0/1 rewards.

    Works for any prior exposing ``updated(successes, failures)``.
    """
    r = np.asarray(reward_seq, dtype=np.int64).reshape(-1)
    if r.size != len(traj):
        raise ValueError("reward sequence length must equal trajectory length")
    succ, fail = reward_counts(prior.shape, traj, r)
    return prior.updated(succ, fail)


def reward_counts(shape, traj, reward_seq):
    succ = np.zeros(shape, dtype=np.int64)
    visits = np.zeros(shape, dtype=np.int64)
    np.add.at(succ, (traj.states, traj.actions), reward_seq)
    np.add.at(visits, (traj.states, traj.actions), 1)
    return succ, visits - succ


def sample_reward_sequence(reward: RewardModel, traj: Trajectory, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    p = reward.success_prob[traj.states, traj.actions]
    return (rng.random(p.size) < p).astype(np.int64)


def gibbs_chain(
    cmp: ControlledMarkovProcess,
    discount: float,
    reward_prior,
    temp_prior: GammaPrior,
    traj: Trajectory,
    config: SamplerConfig = SamplerConfig(),
    rng=None,
    proposal_correction: bool = False,
) -> Chain:
    """Hybrid Gibbs sampler over (reward table, temperature, reward sequence).

    With ``proposal_correction=False`` (default) the acceptance ratio is the
    plain likelihood ratio. On the augmented space (reward table,
    temperature, reward sequence) this is the exact Metropolis-within-Gibbs
    ratio, since the conditional proposal equals the reward table's full
    conditional up to the likelihood factor. ``proposal_correction=True``
    additionally multiplies by prior/proposal density ratios, treating the
    reward sequence as a fixed proposal parameter.
    """
    rng = np.random.default_rng(rng)
    traj.check_bounds(cmp.n_states, cmp.n_actions)
    rec = _Recorder(config)

    state = None
    while state is None:
        reward = reward_prior.sample(rng)
        eta = temp_prior.sample(rng)
        try:
            policy, ll = _score(cmp, discount, reward, eta, traj, config.q_tol)
        except ConvergenceError:
            rec.failures += 1
            continue
        state = JointSample(reward, eta, policy, ll)
    r_seq = sample_reward_sequence(state.reward, traj, rng)
    state = JointSample(state.reward, state.eta, state.policy, state.log_likelihood, r_seq)

    for k in range(1, config.n_samples + 1):
        proposal_dist = conjugate_beta_update(reward_prior, traj, r_seq)
        reward = proposal_dist.sample(rng)
        eta = temp_prior.sample(rng)
        u = rng.random()
        try:
            policy, ll = _score(cmp, discount, reward, eta, traj, config.q_tol)
        except ConvergenceError:
            rec.failures += 1
            policy, ll = None, -np.inf
        current = state.log_likelihood
        log_ratio = ll - current
        if proposal_correction and policy is not None:
            log_ratio += (
                reward_prior.log_density(reward)
                - proposal_dist.log_density(reward)
                - reward_prior.log_density(state.reward)
                + proposal_dist.log_density(state.reward)
            )
        ok = policy is not None and ll > -np.inf and _accept(log_ratio, u)
        new_reward, new_eta, new_policy, new_ll = (
            (reward, eta, policy, ll) if ok else (state.reward, state.eta, state.policy, state.log_likelihood)
        )
        r_seq = sample_reward_sequence(new_reward, traj, rng)
        state = JointSample(new_reward, new_eta, new_policy, new_ll, r_seq)
        rec.step(k, ll, current, ok, state)
    return rec.finish("gibbs", proposal_correction=proposal_correction)


def posterior_mean_reward(chain: Chain) -> RewardModel:
    if not chain.samples:
        raise ValueError("chain has no samples")
    mean = chain.reward_array().mean(axis=0)
    return RewardModel(np.clip(mean, 0.0, 1.0))


def map_sample(chain: Chain, reward_prior, temp_prior) -> JointSample:
    """Retained sample with the largest unnormalised log posterior."""
    if not chain.samples:
        raise ValueError("chain has no samples")
    scores = [
        smp.log_likelihood + reward_prior.log_density(smp.reward) + temp_prior.log_density(smp.eta)
        for smp in chain.samples
    ]
    return chain.samples[int(np.argmax(scores))]


def chain_policy(
    chain: Chain,
    cmp: ControlledMarkovProcess,
    discount: float,
    tie_tol=DEFAULT_TIE_TOL,
    estimator: str = "mean",
    priors=None,
    q_tol=DEFAULT_TOL,
) -> Policy:
    """Greedy policy for a point estimate of the reward.

    ``estimator="mean"`` uses the posterior mean reward. ``estimator="map"``
    needs ``priors=(reward_prior, temp_prior)`` and uses the best retained
    sample.
    """
    if estimator == "mean":
        reward = posterior_mean_reward(chain)
    elif estimator == "map":
        if priors is None:
            raise ValueError("MAP extraction needs the chain's priors")
        reward = map_sample(chain, *priors).reward
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return greedy_policy(solve_optimal_q(Mdp(cmp, reward, discount), q_tol), tie_tol)
