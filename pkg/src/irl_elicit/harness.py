"""Experiment driver: environments, shared demonstrations, every method,
losses, CSV results and per-axis aggregates.

Results files are plain CSV. The fully resolved configuration is echoed at
the top as ``# key = value`` comment lines (keys are the CLI flag names), so
a results file carries everything needed to replay any of its runs.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import (
    discounted_state_occupancy,
    laplace_policy_estimate,
    ml_policy_estimate,
    mwal,
    policy_walk_chain,
    solve_lp_irl,
)
from .baselines.mwal import state_action_occupancy
from .envs import make_demonstrator, sample_maze, sample_random_mdp, simulate
from .mdp import Mdp, greedy_policy, l1_loss, solve_optimal_q
from .priors import BetaProductPrior, GammaPrior
from .samplers import SamplerConfig, chain_policy, gibbs_chain, mh_chain

ALL_METHODS = ("soft", "mh", "gibbs", "lp", "policywalk", "mwal")
DOMAINS = ("random-mdp", "maze")
SWEEP_AXES = ("eta", "horizon", "states")
COLUMNS = (
    "run_id",
    "sweep_axis",
    "sweep_value",
    "method",
    "loss",
    "eta",
    "T",
    "n_states",
    "discount",
    "seed",
    "wall_time_ms",
    "error",
)
WORKERS_ENV = "IRL_ELICIT_WORKERS"
DEFAULT_ETAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


class ConfigError(ValueError):
    pass


def fmt_real(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "random-mdp"
    states: tuple = (16,)
    maze: tuple = (8, 8)
    actions: int = 4
    gamma: float = 0.95
    eta: tuple = DEFAULT_ETAS
    horizon: tuple = (500,)
    runs: int = 100
    methods: tuple = ALL_METHODS
    samples: int = 10_000
    burn_in: int = 2_000
    thin: int = 1
    alpha_beta: tuple = (1.0, 1.0)
    gamma_prior: tuple = (2.0, 0.5)
    pw_confidence: float = 1.0
    lp_penalty: float = 1.05
    lp_r_max: float = 1.0
    mwal_accuracy: float = 1e-3
    mwal_max_rounds: int = 2000
    mwal_features: str = "state-action"
    policy_estimate: str = "auto"
    occupancy_start: str = "initial"
    gibbs_correction: bool = False
    q_tol: float = 1e-6
    seed: int = 0
    # execution-only settings; never echoed, never affect results
    workers: int = field(default=1, compare=False)
    timing: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not self.methods or any(m not in ALL_METHODS for m in self.methods):
            raise ConfigError(f"methods must be a non-empty subset of {ALL_METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods listed twice")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1)")
        if any(e < 0 for e in self.eta):
            raise ConfigError("eta must be non-negative")
        if any(t < 0 for t in self.horizon):
            raise ConfigError("horizon must be non-negative")
        if self.domain == "maze" and len(self.states) > 1:
            raise ConfigError("a states sweep needs the random-mdp domain")
        if self.policy_estimate not in ("auto", "ml", "laplace"):
            raise ConfigError("policy-estimate must be auto, ml or laplace")
        if self.mwal_features not in ("state", "state-action"):
            raise ConfigError("mwal-features must be state or state-action")
        if self.occupancy_start not in ("initial", "empirical"):
            raise ConfigError("occupancy-start must be initial or empirical")
        multi = [ax for ax in SWEEP_AXES if len(getattr(self, ax)) > 1]
        if len(multi) > 1:
            raise ConfigError(f"only one sweep axis may have several values, got {multi}")
        if any(len(getattr(self, ax)) == 0 for ax in SWEEP_AXES):
            raise ConfigError("sweep lists must be non-empty")
        try:
            self.sampler_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def sweep_axis(self) -> str:
        for ax in SWEEP_AXES:
            if len(getattr(self, ax)) > 1:
                return ax
        return "eta"

    @property
    def sweep_values(self) -> tuple:
        return getattr(self, self.sweep_axis)

    def point(self, sweep_index):
        """(eta, horizon, n_states) for one sweep value."""
        vals = {ax: getattr(self, ax)[0] for ax in SWEEP_AXES}
        vals[self.sweep_axis] = self.sweep_values[sweep_index]
        return float(vals["eta"]), int(vals["horizon"]), int(vals["states"])

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(self.samples, self.burn_in, self.thin, self.q_tol)

    def estimator(self) -> str:
        if self.policy_estimate != "auto":
            return self.policy_estimate
        return "ml" if self.domain == "random-mdp" else "laplace"

    def to_pairs(self) -> list:
        """Flag-name / string-value pairs for every result-affecting field."""
        out = []
        for f in fields(self):
            if not f.compare:
                continue
            val = getattr(self, f.name)
            key = f.name.replace("_", "-")
            if isinstance(val, tuple):
                if f.name == "maze":
                    text = f"{val[0]}x{val[1]}"
                else:
                    text = ",".join(fmt_real(v) if isinstance(v, float) else str(v) for v in val)
            elif isinstance(val, bool):
                text = "true" if val else "false"
            elif isinstance(val, float):
                text = fmt_real(val)
            else:
                text = str(val)
            out.append((key, text))
        return out


def _reals(text):
    return tuple(float(v) for v in text.split(","))


def _ints(text):
    return tuple(int(v) for v in text.split(","))


def _pair(text):
    vals = _reals(text)
    if len(vals) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return vals


def _maze(text):
    w, sep, h = text.lower().partition("x")
    if not sep:
        raise ValueError(f"maze size must look like WxH, got {text!r}")
    return int(w), int(h)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


FIELD_PARSERS = {
    "domain": str,
    "states": _ints,
    "maze": _maze,
    "actions": int,
    "gamma": float,
    "eta": _reals,
    "horizon": _ints,
    "runs": int,
    "methods": lambda t: tuple(m.strip() for m in t.split(",") if m.strip()),
    "samples": int,
    "burn_in": int,
    "thin": int,
    "alpha_beta": _pair,
    "gamma_prior": _pair,
    "pw_confidence": float,
    "lp_penalty": float,
    "lp_r_max": float,
    "mwal_accuracy": float,
    "mwal_max_rounds": int,
    "mwal_features": str,
    "policy_estimate": str,
    "occupancy_start": str,
    "gibbs_correction": _bool,
    "q_tol": float,
    "seed": int,
    "workers": int,
    "timing": _bool,
}


def config_from_pairs(pairs, **overrides) -> ExperimentConfig:
    """Build a config from flag-name / text pairs (later pairs win), then
    apply already-typed keyword overrides."""
    values = {}
    for key, text in pairs:
        name = key.strip().lstrip("-").replace("-", "_")
        if name not in FIELD_PARSERS:
            raise ConfigError(f"unknown setting {key!r}")
        try:
            values[name] = FIELD_PARSERS[name](text.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc
    values.update(overrides)
    return ExperimentConfig(**values)


@dataclass
class RunRecord:
    run_id: int
    sweep_axis: str
    sweep_value: float
    method: str
    loss: float
    eta: float
    T: int
    n_states: int
    discount: float
    seed: int
    wall_time_ms: float = float("nan")
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def row(self, timing=False) -> list:
        wall = fmt_real(self.wall_time_ms) if timing and not math.isnan(self.wall_time_ms) else ""
        return [
            str(self.run_id),
            self.sweep_axis,
            fmt_real(self.sweep_value),
            self.method,
            fmt_real(self.loss) if self.ok else "",
            fmt_real(self.eta),
            str(self.T),
            str(self.n_states),
            fmt_real(self.discount),
            str(self.seed),
            wall,
            self.error,
        ]

    @classmethod
    def from_row(cls, row: dict) -> RunRecord:
        def real(text):
            return float(text) if text else float("nan")

        return cls(
            run_id=int(row["run_id"]),
            sweep_axis=row["sweep_axis"],
            sweep_value=float(row["sweep_value"]),
            method=row["method"],
            loss=real(row["loss"]),
            eta=float(row["eta"]),
            T=int(row["T"]),
            n_states=int(row["n_states"]),
            discount=float(row["discount"]),
            seed=int(row["seed"]),
            wall_time_ms=real(row["wall_time_ms"]),
            error=row.get("error", "") or "",
        )


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------


def derive_seed(master_seed, run_index, sweep_index) -> int:
    """64-bit per-run seed; independent of execution order."""
    ss = np.random.SeedSequence([int(master_seed), int(run_index), int(sweep_index)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class RunContext:
    """Everything a method sees for one run (shared across methods)."""

    config: ExperimentConfig
    mdp: Mdp
    demonstrator: object
    trajectory: object
    eta: float
    seed: int
    streams: dict
    cache: dict = field(default_factory=dict)

    @property
    def cmp(self):
        return self.mdp.cmp

    def policy_estimate(self):
        if "estimate" not in self.cache:
            fn = ml_policy_estimate if self.config.estimator() == "ml" else laplace_policy_estimate
            self.cache["estimate"] = fn(self.trajectory, self.cmp.n_states, self.cmp.n_actions)
        return self.cache["estimate"]

    def lp_solution(self):
        if "lp" not in self.cache:
            self.cache["lp"] = solve_lp_irl(
                self.cmp, self.mdp.discount, self.policy_estimate().policy, self.config.lp_penalty, self.config.lp_r_max
            )
        return self.cache["lp"]

    def priors(self):
        a, b = self.config.alpha_beta
        shape, rate = self.config.gamma_prior
        return BetaProductPrior.constant(self.cmp.n_states, self.cmp.n_actions, a, b), GammaPrior(shape, rate)


def build_context(config: ExperimentConfig, run_index: int, sweep_index: int) -> RunContext:
    eta, horizon, n_states = config.point(sweep_index)
    seed = derive_seed(config.seed, run_index, sweep_index)
    env_ss, reward_ss, demo_ss, *method_ss = np.random.SeedSequence(seed).spawn(3 + len(ALL_METHODS))
    if config.domain == "random-mdp":
        cmp = sample_random_mdp(n_states, config.actions, np.random.default_rng(env_ss))
    else:
        cmp, _ = sample_maze(config.maze[0], config.maze[1], np.random.default_rng(env_ss))
    a, b = config.alpha_beta
    prior = BetaProductPrior.constant(cmp.n_states, cmp.n_actions, a, b)
    true_reward = prior.sample(np.random.default_rng(reward_ss))
    mdp = Mdp(cmp, true_reward, config.gamma)
    demo = make_demonstrator(mdp, eta, config.q_tol)
    traj = simulate(cmp, true_reward, demo, horizon, np.random.default_rng(demo_ss))
    streams = {m: ss for m, ss in zip(ALL_METHODS, method_ss)}
    return RunContext(config, mdp, demo, traj, eta, seed, streams)


def _greedy_loss(ctx, reward):
    cfg = ctx.config
    q = solve_optimal_q(Mdp(ctx.cmp, reward, ctx.mdp.discount), cfg.q_tol)
    return l1_loss(ctx.mdp, greedy_policy(q), cfg.q_tol)


def _chain_loss(ctx, chain):
    pol = chain_policy(chain, ctx.cmp, ctx.mdp.discount, q_tol=ctx.config.q_tol)
    return l1_loss(ctx.mdp, pol, ctx.config.q_tol)


def method_soft(ctx):
    return l1_loss(ctx.mdp, ctx.demonstrator, ctx.config.q_tol)


def method_mh(ctx):
    rp, tp = ctx.priors()
    rng = np.random.default_rng(ctx.streams["mh"])
    chain = mh_chain(ctx.cmp, ctx.mdp.discount, rp, tp, ctx.trajectory, ctx.config.sampler_config(), rng)
    return _chain_loss(ctx, chain)


def method_gibbs(ctx):
    rp, tp = ctx.priors()
    rng = np.random.default_rng(ctx.streams["gibbs"])
    chain = gibbs_chain(
        ctx.cmp,
        ctx.mdp.discount,
        rp,
        tp,
        ctx.trajectory,
        ctx.config.sampler_config(),
        rng,
        proposal_correction=ctx.config.gibbs_correction,
    )
    return _chain_loss(ctx, chain)


def method_lp(ctx):
    return _greedy_loss(ctx, ctx.lp_solution().reward)


def method_policywalk(ctx):
    rp, _ = ctx.priors()
    rng = np.random.default_rng(ctx.streams["policywalk"])
    chain = policy_walk_chain(
        ctx.cmp,
        ctx.mdp.discount,
        rp,
        ctx.trajectory,
        ctx.config.pw_confidence,
        ctx.config.sampler_config(),
        ctx.lp_solution().reward,
        rng,
    )
    return _chain_loss(ctx, chain)


def method_mwal(ctx):
    est = ctx.policy_estimate()
    start = None
    if ctx.config.occupancy_start == "empirical" and len(ctx.trajectory):
        start = np.zeros(ctx.cmp.n_states)
        start[ctx.trajectory.states[0]] = 1.0
    if ctx.config.mwal_features == "state":
        x_demo = discounted_state_occupancy(ctx.cmp, est.policy, ctx.mdp.discount, initial=start)
    else:
        x_demo = state_action_occupancy(ctx.cmp, est.policy, ctx.mdp.discount, initial=start)
    mixed = mwal(
        ctx.cmp,
        ctx.mdp.discount,
        x_demo,
        ctx.config.mwal_accuracy,
        max_rounds=ctx.config.mwal_max_rounds,
        q_tol=ctx.config.q_tol,
    )
    return mixed.loss(ctx.mdp, ctx.config.q_tol)


METHOD_FUNCS = {
    "soft": method_soft,
    "mh": method_mh,
    "gibbs": method_gibbs,
    "lp": method_lp,
    "policywalk": method_policywalk,
    "mwal": method_mwal,
}


def run_id_for(config, run_index, sweep_index) -> int:
    return sweep_index * config.runs + run_index


def run_single(config: ExperimentConfig, run_index: int, sweep_index: int = 0) -> list:
    """All requested methods on one environment and one shared demonstration."""
    ctx = build_context(config, run_index, sweep_index)
    eta, horizon, _ = config.point(sweep_index)
    base = dict(
        run_id=run_id_for(config, run_index, sweep_index),
        sweep_axis=config.sweep_axis,
        sweep_value=float(config.sweep_values[sweep_index]),
        eta=eta,
        T=horizon,
        n_states=ctx.cmp.n_states,
        discount=config.gamma,
        seed=ctx.seed,
    )
    records = []
    for method in config.methods:
        t0 = time.perf_counter()
        try:
            loss = float(METHOD_FUNCS[method](ctx))
            err = ""
        except Exception as exc:  # one failing method must not sink the run
            loss, err = float("nan"), f"{type(exc).__name__}: {exc}".replace("\n", " ")
        wall = 1000.0 * (time.perf_counter() - t0)
        records.append(RunRecord(method=method, loss=loss, wall_time_ms=wall, error=err, **base))
    return records


# ---------------------------------------------------------------------------
# batches and files
# ---------------------------------------------------------------------------


def _task(args):
    config, run_index, sweep_index = args
    return run_single(config, run_index, sweep_index)


def sort_records(records) -> list:
    return sorted(records, key=lambda r: (r.run_id, r.method))


def results_text(config: ExperimentConfig, records) -> str:
    buf = io.StringIO()
    for key, val in config.to_pairs():
        buf.write(f"# {key} = {val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in sort_records(records):
        writer.writerow(rec.row(config.timing))
    return buf.getvalue()


def write_results(path, config, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_text(config, records))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_batch(config: ExperimentConfig, out_path=None, progress=None) -> list:
    """Every run at every sweep value. Writes the results file (and its
    aggregate next to it) when ``out_path`` is given; partial results are
    flushed if interrupted."""
    tasks = [(config, r, s) for s in range(len(config.sweep_values)) for r in range(config.runs)]
    records = []
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for recs in pool.map(_task, tasks):
                    records.extend(recs)
                    if progress:
                        progress(recs)
        else:
            for t in tasks:
                recs = _task(t)
                records.extend(recs)
                if progress:
                    progress(recs)
    finally:
        if out_path is not None:
            write_results(out_path, config, records)
            write_aggregate(aggregate_path(out_path), aggregate(records))
    return sort_records(records)


def aggregate_path(results_path) -> Path:
    p = Path(results_path)
    return p.with_name(p.stem + ".aggregate.csv")


def read_results(path):
    """Return ``(pairs, records)``: the echoed config and every record."""
    pairs = []
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, sep, val = line[1:].partition("=")
                if not sep:
                    raise ValueError(f"malformed header line: {line!r}")
                pairs.append((key.strip(), val.strip()))
            elif line.strip():
                lines.append(line)
    if not lines:
        raise ValueError("results file has no column header")
    reader = csv.DictReader(lines)
    missing = set(COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"results file lacks columns {sorted(missing)}")
    return pairs, [RunRecord.from_row(row) for row in reader]


@dataclass(frozen=True)
class AggregateRow:
    sweep_axis: str
    sweep_value: float
    method: str
    mean_loss: float
    stderr: float
    n: int


def aggregate(records) -> list:
    """Mean and standard error per (axis, sweep value, method); error
    records are skipped. ``stderr`` is 0 for a single record."""
    groups = defaultdict(list)
    for r in records:
        if r.ok:
            groups[(r.sweep_axis, r.sweep_value, r.method)].append(r.loss)
    rows = []
    for (axis, value, method), losses in groups.items():
        arr = np.array(losses)
        n = arr.size
        se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows.append(AggregateRow(axis, value, method, float(arr.mean()), se, n))
    method_rank = {m: i for i, m in enumerate(ALL_METHODS)}
    rows.sort(key=lambda r: (r.sweep_axis, r.sweep_value, method_rank.get(r.method, 99), r.method))
    return rows


AGG_COLUMNS = ("sweep_value", "method", "mean_loss", "stderr", "n")


def write_aggregate(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_COLUMNS)
        for r in rows:
            w.writerow([fmt_real(r.sweep_value), r.method, fmt_real(r.mean_loss), fmt_real(r.stderr), r.n])


def read_aggregate(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [
            (float(row["sweep_value"]), row["method"], float(row["mean_loss"]), float(row["stderr"]), int(row["n"]))
            for row in csv.DictReader(fh)
        ]


def emit_plot_data(results_path, out_dir) -> list:
    """One ``loss_vs_<axis>.csv`` per sweep axis found in the results."""
    pairs, records = read_results(results_path)
    rows = aggregate(records)
    axes = sorted({r.sweep_axis for r in records})
    if not axes:
        axes = [_axis_from_pairs(pairs)]
    out_dir = Path(out_dir)
    written = []
    for ax in axes:
        path = out_dir / f"loss_vs_{ax}.csv"
        write_aggregate(path, [r for r in rows if r.sweep_axis == ax])
        written.append(path)
    return written


def _axis_from_pairs(pairs):
    d = dict(pairs)
    for ax in SWEEP_AXES:
        if len(d.get(ax, "").split(",")) > 1:
            return ax
    return "eta"
