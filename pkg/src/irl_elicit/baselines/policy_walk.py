"""Bayesian IRL baseline: Metropolis-Hastings over reward tables with prior
proposals, scoring a reward by ``confidence * sum_t Q*(s_t, a_t)``."""

from __future__ import annotations

import numpy as np

from ..mdp import ConvergenceError, ControlledMarkovProcess, Mdp, RewardModel, Trajectory, softmax_policy, solve_optimal_q
from ..samplers import DEFAULT_MAX_ITER, JointSample, SamplerConfig, _accept, _Recorder

DEFAULT_CONFIDENCE = 1.0


def _q_score(cmp, discount, reward, traj, confidence, q_tol):
    q = solve_optimal_q(Mdp(cmp, reward, discount), q_tol, DEFAULT_MAX_ITER)
    score = confidence * float(q[traj.states, traj.actions].sum()) if len(traj) else 0.0
    return q, score


def policy_walk_chain(
    cmp: ControlledMarkovProcess,
    discount: float,
    reward_prior,
    traj: Trajectory,
    confidence: float = DEFAULT_CONFIDENCE,
    config: SamplerConfig = SamplerConfig(),
    seed_reward: RewardModel | None = None,
    rng=None,
):
    """Chain started at ``seed_reward`` (drawn from the prior if omitted).

    Samples carry ``eta = confidence``, the Boltzmann policy
    ``softmax(Q*, confidence)`` and, in ``log_likelihood``, the Q-sum score.
    """
    if confidence < 0:
        raise ValueError("confidence must be non-negative")
    rng = np.random.default_rng(rng)
    traj.check_bounds(cmp.n_states, cmp.n_actions)
    rec = _Recorder(config)

    if seed_reward is None:
        seed_reward = reward_prior.sample(rng)
    q, score = _q_score(cmp, discount, seed_reward, traj, confidence, config.q_tol)
    state = JointSample(seed_reward, confidence, softmax_policy(q, confidence), score)

    for k in range(1, config.n_samples + 1):
        reward = reward_prior.sample(rng)
        u = rng.random()
        try:
            q, score = _q_score(cmp, discount, reward, traj, confidence, config.q_tol)
        except ConvergenceError:
            rec.failures += 1
            q, score = None, -np.inf
        current = state.log_likelihood
        ok = q is not None and _accept(score - current, u)
        if ok:
            state = JointSample(reward, confidence, softmax_policy(q, confidence), score)
        rec.step(k, score, current, ok, state)
    return rec.finish("policywalk", confidence=confidence)
