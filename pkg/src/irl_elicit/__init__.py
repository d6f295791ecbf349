"""Bayesian inverse reinforcement learning by posterior sampling over
Beta-Bernoulli rewards and a softmax demonstrator's inverse temperature,
with LP, PolicyWalk and MWAL comparison methods and an experiment harness."""

from ._kernels import BACKEND
from .envs import (
    GenerationError,
    MazeSpec,
    is_communicating,
    make_demonstrator,
    sample_maze,
    sample_random_mdp,
    sample_reward,
    simulate,
)
from .mdp import (
    ControlledMarkovProcess,
    ConvergenceError,
    Mdp,
    Policy,
    RewardModel,
    Trajectory,
    bellman_residual,
    evaluate_policy_q,
    greedy_policy,
    l1_loss,
    policy_value,
    softmax_policy,
    solve_optimal_q,
    trajectory_log_likelihood,
)
from .priors import BetaProductPrior, GammaPrior, GridRewardPrior
from .samplers import (
    Chain,
    JointSample,
    SamplerConfig,
    chain_policy,
    conjugate_beta_update,
    gibbs_chain,
    mh_chain,
    posterior_mean_reward,
    sample_reward_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BetaProductPrior",
    "Chain",
    "ControlledMarkovProcess",
    "ConvergenceError",
    "GammaPrior",
    "GenerationError",
    "GridRewardPrior",
    "JointSample",
    "MazeSpec",
    "Mdp",
    "Policy",
    "RewardModel",
    "SamplerConfig",
    "Trajectory",
    "bellman_residual",
    "chain_policy",
    "conjugate_beta_update",
    "evaluate_policy_q",
    "gibbs_chain",
    "greedy_policy",
    "is_communicating",
    "l1_loss",
    "make_demonstrator",
    "mh_chain",
    "policy_value",
    "posterior_mean_reward",
    "sample_maze",
    "sample_random_mdp",
    "sample_reward",
    "sample_reward_sequence",
    "simulate",
    "softmax_policy",
    "solve_optimal_q",
    "trajectory_log_likelihood",
]
