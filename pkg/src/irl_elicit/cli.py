"""``irl-elicit`` command line: run experiment batches, aggregate results
files and replay single runs from their recorded configuration."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import interchange
from .harness import (
    ConfigError,
    aggregate,
    build_context,
    config_from_pairs,
    default_workers,
    emit_plot_data,
    read_results,
    run_batch,
    run_single,
    write_aggregate,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2

# flag -> help; every flag takes one text value parsed by the harness
RUN_FLAGS = {
    "domain": "random-mdp or maze",
    "states": "state count(s) for random MDPs, comma-separated to sweep",
    "maze": "maze size WxH",
    "actions": "actions per state for random MDPs",
    "gamma": "discount factor",
    "eta": "demonstrator inverse temperature(s)",
    "horizon": "demonstration length(s) T",
    "runs": "runs per sweep value",
    "methods": "comma-separated subset of soft,mh,gibbs,lp,policywalk,mwal",
    "samples": "MCMC iterations",
    "burn-in": "discarded leading iterations",
    "thin": "keep every n-th post burn-in sample",
    "alpha-beta": "Beta reward prior A,B",
    "gamma-prior": "Gamma temperature prior SHAPE,RATE",
    "pw-confidence": "PolicyWalk confidence alpha",
    "lp-penalty": "LP IRL penalty weight",
    "lp-r-max": "LP IRL reward bound",
    "mwal-accuracy": "MWAL target accuracy",
    "mwal-max-rounds": "cap on MWAL rounds",
    "mwal-features": "state or state-action occupancy features",
    "policy-estimate": "auto, ml or laplace",
    "occupancy-start": "initial or empirical start for feature expectations",
    "gibbs-correction": "true to add the proposal-density term to the Gibbs acceptance ratio",
    "q-tol": "value-iteration tolerance",
    "seed": "master seed",
}


def read_config_file(path) -> list:
    """Flat ``key = value`` lines; blank lines and ``#`` comments skipped."""
    pairs = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        pairs.append((key.strip(), val.strip()))
    return pairs


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="irl-elicit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment batch")
    run.add_argument("--config", help="flat key = value file; flags override it")
    for flag, text in RUN_FLAGS.items():
        run.add_argument(f"--{flag}", help=text)
    run.add_argument("--workers", type=int, help="parallel worker processes (default from IRL_ELICIT_WORKERS)")
    run.add_argument("--timing", action="store_true", help="record wall_time_ms (breaks byte-identical output)")
    run.add_argument("--out", required=True, help="results CSV path")
    run.add_argument("--plot-dir", help="also write loss_vs_<axis>.csv files here")
    run.add_argument("-q", "--quiet", action="store_true")

    agg = sub.add_parser("aggregate", help="mean and standard error per sweep value and method")
    agg.add_argument("--in", dest="inp", required=True)
    agg.add_argument("--out", required=True, help="aggregate CSV, or a directory for per-axis files")

    rep = sub.add_parser("replay", help="re-run one recorded run and compare")
    rep.add_argument("--in", dest="inp", required=True)
    rep.add_argument("--run-id", type=int, help="run to replay (default: the first)")
    rep.add_argument("--dump", help="write the run's environment and demonstration as JSON")
    return parser


def _config_from_args(args):
    pairs = read_config_file(args.config) if args.config else []
    for flag in RUN_FLAGS:
        val = getattr(args, flag.replace("-", "_"))
        if val is not None:
            pairs.append((flag, val))
    workers = args.workers if args.workers is not None else default_workers()
    return config_from_pairs(pairs, workers=workers, timing=args.timing)


def cmd_run(args) -> int:
    config = _config_from_args(args)
    done = [0]
    total = config.runs * len(config.sweep_values)

    def progress(recs):
        done[0] += 1
        if not args.quiet:
            print(f"\rrun {done[0]}/{total}", end="", file=sys.stderr, flush=True)

    records = run_batch(config, args.out, progress)
    if not args.quiet:
        print(file=sys.stderr)
    if args.plot_dir:
        emit_plot_data(args.out, args.plot_dir)
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"run {r.run_id} {r.method}: {r.error}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_aggregate(args) -> int:
    out = Path(args.out)
    if out.is_dir() or args.out.endswith(("/", "\\")):
        emit_plot_data(args.inp, out)
    else:
        _, records = read_results(args.inp)
        write_aggregate(out, aggregate(records))
    return EXIT_OK


def cmd_replay(args) -> int:
    pairs, records = read_results(args.inp)
    config = config_from_pairs(pairs)
    run_id = records[0].run_id if args.run_id is None and records else args.run_id
    if run_id is None:
        raise ConfigError("results file has no records")
    sweep_index, run_index = divmod(run_id, config.runs)
    if sweep_index >= len(config.sweep_values):
        raise ConfigError(f"run id {run_id} is outside the recorded batch")
    recorded = {r.method: r for r in records if r.run_id == run_id}
    if args.dump:
        interchange.dump(interchange.run_to_dict(build_context(config, run_index, sweep_index)), args.dump)
    status = EXIT_OK
    for rec in run_single(config, run_index, sweep_index):
        old = recorded.get(rec.method)
        same = old is not None and old.row() == rec.row()
        loss = f"{rec.loss:.6g}" if rec.ok else rec.error
        print(f"run {run_id} {rec.method}: {loss} {'match' if same else 'MISMATCH'}")
        if not same or not rec.ok:
            status = EXIT_PARTIAL
    return status


COMMANDS = {"run": cmd_run, "aggregate": cmd_aggregate, "replay": cmd_replay}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"irl-elicit: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
