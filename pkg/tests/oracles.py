"""Independent reference computations used by the test-suite.

Nothing here calls the value-iteration kernels or the samplers; Q tables
come from exact dense linear solves.
"""

import itertools

import numpy as np
from scipy import special


def linear_policy_q(transitions, reward, policy, gamma):
    """Q^pi by solving (I - gamma P_pi) V = r_pi exactly."""
    n_s = reward.shape[0]
    p_pi = np.einsum("sa,sat->st", policy, transitions)
    r_pi = (policy * reward).sum(axis=1)
    v = np.linalg.solve(np.eye(n_s) - gamma * p_pi, r_pi)
    return reward + gamma * transitions @ v


def policy_iteration_q(transitions, reward, gamma, max_iter=1000):
    """Q* by Howard policy iteration with exact evaluation."""
    n_s, n_a = reward.shape
    actions = np.zeros(n_s, dtype=int)
    for _ in range(max_iter):
        pol = np.eye(n_a)[actions]
        q = linear_policy_q(transitions, reward, pol, gamma)
        best = q.max(axis=1)
        # keep the incumbent action unless strictly improved
        keep = q[np.arange(n_s), actions] >= best - 1e-12
        new = np.where(keep, actions, q.argmax(axis=1))
        if np.array_equal(new, actions):
            return q
        actions = new
    raise RuntimeError("policy iteration did not terminate")


def occupancy_linear(transitions, policy, initial, gamma):
    p_pi = np.einsum("sa,sat->st", policy, transitions)
    n = p_pi.shape[0]
    return np.linalg.solve(np.eye(n) - gamma * p_pi.T, initial)


def softmax_loglik(q, eta, states, actions):
    z = eta * q
    logp = z - special.logsumexp(z, axis=1, keepdims=True)
    return logp[states, actions].sum()


def enumerate_grid_posterior(transitions, gamma, points, log_prior_weights, temp_nodes, temp_weights, states, actions, score="softmax", confidence=1.0):
    """Exact posterior over a product grid of reward tables.

    Returns ``(tables, log_post)`` where ``tables[j]`` is the j-th grid reward
    table (S, A) and ``log_post`` the normalised log posterior mass.

    ``score="softmax"`` integrates the softmax likelihood over the
    temperature quadrature; ``score="qsum"`` uses exp(confidence * sum Q*).
    """
    n_s, n_a = log_prior_weights.shape[:2]
    k = points.size
    combos = np.array(list(itertools.product(range(k), repeat=n_s * n_a)))
    tables = points[combos].reshape(-1, n_s, n_a)
    entry_lw = log_prior_weights.reshape(n_s * n_a, k)
    log_prior = entry_lw[np.arange(n_s * n_a), combos].sum(axis=1)
    log_post = np.empty(len(tables))
    for j, rew in enumerate(tables):
        q = policy_iteration_q(transitions, rew, gamma)
        if score == "softmax":
            ll = np.array([softmax_loglik(q, eta, states, actions) for eta in temp_nodes])
            log_post[j] = log_prior[j] + special.logsumexp(ll, b=temp_weights)
        else:
            log_post[j] = log_prior[j] + confidence * q[states, actions].sum()
    log_post -= special.logsumexp(log_post)
    return tables, log_post, combos


def entry_marginals(combos, log_post, n_points):
    """Per-entry marginal distributions over grid indices: (n_entries, K)."""
    post = np.exp(log_post)
    n_entries = combos.shape[1]
    out = np.zeros((n_entries, n_points))
    for e in range(n_entries):
        np.add.at(out[e], combos[:, e], post)
    return out


def strongly_connected(transitions):
    """Plain BFS reachability check, independent of scipy.sparse."""
    adj = (transitions > 0).any(axis=1)
    n = adj.shape[0]
    for src in range(n):
        seen = {src}
        frontier = [src]
        while frontier:
            nxt = []
            for s in frontier:
                for t in np.flatnonzero(adj[s]):
                    if t not in seen:
                        seen.add(int(t))
                        nxt.append(int(t))
            frontier = nxt
        if len(seen) != n:
            return False
    return True


def random_cmp(rng, n_states, n_actions, density=1.0):
    t = rng.random((n_states, n_actions, n_states))
    if density < 1.0:
        t *= rng.random(t.shape) < density
        t[..., 0] += 1e-3
    t /= t.sum(axis=2, keepdims=True)
    return t
