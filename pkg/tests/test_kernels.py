import os
import subprocess
import sys

import numpy as np
import pytest

from irl_elicit import _kernels

from oracles import random_cmp

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba backend unavailable")


def _inputs(seed, n_s=12, n_a=4):
    rng = np.random.default_rng(seed)
    t = random_cmp(rng, n_s, n_a)
    return t, rng.random((n_s, n_a)), rng.dirichlet(np.ones(n_a), size=n_s)


@needs_numba
@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("gamma", [0.0, 0.5, 0.95])
def test_backends_agree(seed, gamma):
    t, r, pol = _inputs(seed)
    stop = 1e-9
    qa, da, na = _kernels.np_optimal_q(t, r, gamma, stop, 100_000)
    qb, db, nb = _kernels.nb_optimal_q(t, r, gamma, stop, 100_000)
    assert na == nb
    np.testing.assert_allclose(qa, qb, rtol=0, atol=1e-12)
    qa, _, na = _kernels.np_policy_q(t, r, pol, gamma, stop, 100_000)
    qb, _, nb = _kernels.nb_policy_q(t, r, pol, gamma, stop, 100_000)
    assert na == nb
    np.testing.assert_allclose(qa, qb, rtol=0, atol=1e-12)


@pytest.mark.parametrize("fn", ["np_optimal_q", "nb_optimal_q"])
def test_iteration_cap(fn):
    if fn.startswith("nb") and not _kernels.HAS_NUMBA:
        pytest.skip("numba backend unavailable")
    t, r, _ = _inputs(0)
    q, delta, n = getattr(_kernels, fn)(t, r, 0.99, 1e-12, 3)
    assert n == 3 and delta > 1e-12


def _backend_with_env(value):
    env = dict(os.environ, IRL_ELICIT_DISABLE_NUMBA=value)
    out = subprocess.run(
        [sys.executable, "-c", "import irl_elicit; print(irl_elicit.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return out.stdout.strip()


def test_env_flag_selects_numpy():
    assert _backend_with_env("1") == "numpy"


@needs_numba
def test_default_backend_is_numba():
    assert _backend_with_env("") == "numba"


def test_numpy_backend_end_to_end():
    code = (
        "import numpy as np, irl_elicit as ie;"
        "cmp = ie.sample_random_mdp(6, 2, 0);"
        "m = ie.Mdp(cmp, ie.RewardModel(np.full((6, 2), 0.3)), 0.9);"
        "print(repr(float(ie.solve_optimal_q(m).max())))"
    )
    env = dict(os.environ, IRL_ELICIT_DISABLE_NUMBA="yes")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(3.0, abs=1e-6)
