"""Plain-text JSON interchange for environments, trajectories and chains.

Reals are written with Python's shortest round-tripping repr, so a dump
followed by a load reproduces every array bit for bit. Each document has a
``kind`` tag and a ``version``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mdp import ControlledMarkovProcess, RewardModel, Trajectory

VERSION = 1


def _doc(kind, **body):
    return {"kind": kind, "version": VERSION, **body}


def _check(doc, kind):
    if doc.get("kind") != kind:
        raise ValueError(f"expected a {kind!r} document, got {doc.get('kind')!r}")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported {kind} version {doc.get('version')!r}")


def cmp_to_dict(cmp: ControlledMarkovProcess) -> dict:
    return _doc("cmp", transitions=cmp.transitions.tolist(), initial_dist=cmp.initial_dist.tolist())


def cmp_from_dict(doc) -> ControlledMarkovProcess:
    _check(doc, "cmp")
    return ControlledMarkovProcess(np.array(doc["transitions"], dtype=np.float64), np.array(doc["initial_dist"]))


def reward_to_dict(reward: RewardModel) -> dict:
    return _doc("reward", success_prob=reward.success_prob.tolist())


def reward_from_dict(doc) -> RewardModel:
    _check(doc, "reward")
    return RewardModel(np.array(doc["success_prob"], dtype=np.float64))


def trajectory_to_dict(traj: Trajectory) -> dict:
    rewards = None if traj.rewards is None else traj.rewards.tolist()
    return _doc("trajectory", states=traj.states.tolist(), actions=traj.actions.tolist(), rewards=rewards)


def trajectory_from_dict(doc) -> Trajectory:
    _check(doc, "trajectory")
    return Trajectory(
        np.array(doc["states"], dtype=np.int64),
        np.array(doc["actions"], dtype=np.int64),
        None if doc.get("rewards") is None else np.array(doc["rewards"], dtype=np.int64),
    )


def chain_to_dict(chain) -> dict:
    """Retained reward/temperature samples and the accept trace. Policies
    are omitted; they are recomputable from each reward and temperature."""
    cfg = chain.config
    return _doc(
        "chain",
        method=chain.method,
        config={"n_samples": cfg.n_samples, "burn_in": cfg.burn_in, "thin": cfg.thin, "q_tol": cfg.q_tol},
        acceptance_rate=chain.acceptance_rate,
        n_solver_failures=chain.n_solver_failures,
        rewards=chain.reward_array().tolist() if len(chain) else [],
        etas=chain.eta_array().tolist(),
        log_likelihoods=[s.log_likelihood for s in chain.samples],
        accepted=np.asarray(chain.accepted, dtype=bool).tolist(),
    )


def run_to_dict(ctx) -> dict:
    """One harness run: environment, true reward, demonstrator and the
    shared demonstration."""
    return _doc(
        "run",
        seed=ctx.seed,
        eta=ctx.eta,
        discount=ctx.mdp.discount,
        cmp=cmp_to_dict(ctx.cmp),
        reward=reward_to_dict(ctx.mdp.reward),
        demonstrator=ctx.demonstrator.action_prob.tolist(),
        trajectory=trajectory_to_dict(ctx.trajectory),
    )


def dumps(doc) -> str:
    # allow_nan keeps -inf log-likelihoods representable
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def dump(doc, path):
    Path(path).write_text(dumps(doc), encoding="utf-8")


def load(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
