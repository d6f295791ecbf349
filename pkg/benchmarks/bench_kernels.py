"""Time the numba and numpy value-iteration kernels on random MDPs.

    python benchmarks/bench_kernels.py --states 16 64 --gamma 0.95 --repeat 50
"""

import argparse
import time

import numpy as np

from irl_elicit import _kernels


def random_problem(rng, n_states, n_actions):
    t = rng.random((n_states, n_actions, n_states))
    t /= t.sum(axis=2, keepdims=True)
    return t, rng.random((n_states, n_actions)), rng.dirichlet(np.ones(n_actions), size=n_states)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--states", type=int, nargs="+", default=[16, 64, 256])
    ap.add_argument("--actions", type=int, default=4)
    ap.add_argument("--gamma", type=float, default=0.95)
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable or disabled; timing the numpy path only")
    rng = np.random.default_rng(args.seed)
    stop = args.tol * (1 - args.gamma) / args.gamma
    print(f"{'kernel':<10}{'S':>6}{'sweeps':>8}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}")
    for n in args.states:
        t, r, pol = random_problem(rng, n, args.actions)
        for name, np_fn, nb_args in (
            ("optimal", "optimal_q", (t, r, args.gamma, stop, 100_000)),
            ("policy", "policy_q", (t, r, pol, args.gamma, stop, 100_000)),
        ):
            np_time, (q_np, _, sweeps) = best_of(lambda: getattr(_kernels, "np_" + np_fn)(*nb_args), args.repeat)
            line = f"{name:<10}{n:>6}{sweeps:>8}{1e3 * np_time:>11.3f}"
            if _kernels.HAS_NUMBA:
                nb_fn = getattr(_kernels, "nb_" + np_fn)
                nb_fn(*nb_args)  # compile outside the timed region
                nb_time, (q_nb, _, _) = best_of(lambda: nb_fn(*nb_args), args.repeat)
                assert np.abs(q_np - q_nb).max() < 1e-9
                line += f"{1e3 * nb_time:>11.3f}{np_time / nb_time:>8.1f}x"
            print(line)


if __name__ == "__main__":
    main()
