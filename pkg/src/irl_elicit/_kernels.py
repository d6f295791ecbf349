"""Inner loops for tabular dynamic programming.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics. The numba path is used when numba imports
cleanly, unless ``IRL_ELICIT_DISABLE_NUMBA`` is set to a truthy value, in
which case the numpy path is bound instead. ``BACKEND`` records the choice.

Both paths run Jacobi sweeps, ``Q_{k+1} = B Q_k``, and stop once
``max|Q_{k+1} - Q_k| <= stop``. They return ``(Q, last_delta, n_sweeps)``.
"""

import os

import numpy as np

_DISABLE = os.environ.get("IRL_ELICIT_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    if _DISABLE:
        raise ImportError("numba disabled by IRL_ELICIT_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------


def np_optimal_q(transitions, reward, gamma, stop, max_iter):
    q = reward.copy()
    delta = np.inf
    n = 0
    while n < max_iter:
        v = q.max(axis=1)
        q_new = reward + gamma * (transitions @ v)
        delta = float(np.abs(q_new - q).max())
        q = q_new
        n += 1
        if delta <= stop:
            break
    return q, delta, n


def np_policy_q(transitions, reward, policy, gamma, stop, max_iter):
    q = reward.copy()
    delta = np.inf
    n = 0
    while n < max_iter:
        v = (policy * q).sum(axis=1)
        q_new = reward + gamma * (transitions @ v)
        delta = float(np.abs(q_new - q).max())
        q = q_new
        n += 1
        if delta <= stop:
            break
    return q, delta, n


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def nb_optimal_q(transitions, reward, gamma, stop, max_iter):
        n_s, n_a = reward.shape
        q = reward.copy()
        v = np.empty(n_s)
        delta = np.inf
        n = 0
        while n < max_iter:
            for s in range(n_s):
                best = q[s, 0]
                for a in range(1, n_a):
                    if q[s, a] > best:
                        best = q[s, a]
                v[s] = best
            delta = 0.0
            for s in range(n_s):
                for a in range(n_a):
                    acc = 0.0
                    row = transitions[s, a]
                    for s2 in range(n_s):
                        acc += row[s2] * v[s2]
                    new = reward[s, a] + gamma * acc
                    d = abs(new - q[s, a])
                    if d > delta:
                        delta = d
                    q[s, a] = new
            n += 1
            if delta <= stop:
                break
        return q, delta, n

    @njit(cache=True, nogil=True)
    def nb_policy_q(transitions, reward, policy, gamma, stop, max_iter):
        n_s, n_a = reward.shape
        q = reward.copy()
        v = np.empty(n_s)
        delta = np.inf
        n = 0
        while n < max_iter:
            for s in range(n_s):
                acc = 0.0
                for a in range(n_a):
                    acc += policy[s, a] * q[s, a]
                v[s] = acc
            delta = 0.0
            for s in range(n_s):
                for a in range(n_a):
                    acc = 0.0
                    row = transitions[s, a]
                    for s2 in range(n_s):
                        acc += row[s2] * v[s2]
                    new = reward[s, a] + gamma * acc
                    d = abs(new - q[s, a])
                    if d > delta:
                        delta = d
                    q[s, a] = new
            n += 1
            if delta <= stop:
                break
        return q, delta, n

    optimal_q = nb_optimal_q
    policy_q = nb_policy_q
    BACKEND = "numba"
else:
    optimal_q = np_optimal_q
    policy_q = np_policy_q
    BACKEND = "numpy"
