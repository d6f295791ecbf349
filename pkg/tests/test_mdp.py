import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from irl_elicit import (
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

from conftest import make_mdp, one_state_two_actions
from oracles import linear_policy_q, policy_iteration_q

TOL = 1e-6


class TestTypes:
    def test_rejects_unnormalised_rows(self):
        t = np.ones((2, 1, 2))
        with pytest.raises(ValueError):
            ControlledMarkovProcess(t, np.array([0.5, 0.5]))

    def test_rejects_bad_initial(self):
        t = np.full((2, 1, 2), 0.5)
        with pytest.raises(ValueError):
            ControlledMarkovProcess(t, np.array([0.7, 0.7]))

    def test_reward_range(self):
        with pytest.raises(ValueError):
            RewardModel(np.array([[1.2]]))

    def test_discount_bounds(self):
        cmp = ControlledMarkovProcess(np.ones((1, 1, 1)), np.ones(1))
        with pytest.raises(ValueError):
            Mdp(cmp, RewardModel(np.ones((1, 1))), 1.0)

    def test_trajectory_lengths(self):
        with pytest.raises(ValueError):
            Trajectory([0, 1], [0])
        with pytest.raises(ValueError):
            Trajectory([0, 1], [0, 0], [1])
        assert len(Trajectory([], [])) == 0


class TestSolveOptimalQ:
    def test_geometric_series(self):
        cmp = ControlledMarkovProcess(np.ones((1, 1, 1)), np.ones(1))
        q = solve_optimal_q(Mdp(cmp, RewardModel(np.ones((1, 1))), 0.5), TOL)
        assert q[0, 0] == pytest.approx(2.0, abs=TOL)

    def test_zero_discount_is_reward(self, rng):
        mdp = make_mdp(rng, 5, 3, gamma=0.0)
        np.testing.assert_array_equal(solve_optimal_q(mdp, TOL), mdp.reward.success_prob)

    def test_matches_policy_iteration(self, rng):
        mdp = make_mdp(rng, 3, 2, gamma=0.9)
        exact = policy_iteration_q(mdp.cmp.transitions, mdp.reward.success_prob, 0.9)
        assert np.abs(solve_optimal_q(mdp, TOL) - exact).max() <= TOL

    def test_residual_bound(self, rng):
        for gamma in (0.5, 0.9, 0.99):
            mdp = make_mdp(rng, 6, 3, gamma)
            assert bellman_residual(mdp, solve_optimal_q(mdp, TOL)) <= TOL

    def test_non_convergence(self, rng):
        mdp = make_mdp(rng, 4, 2, gamma=0.99)
        with pytest.raises(ConvergenceError) as info:
            solve_optimal_q(mdp, 1e-9, max_iter=3)
        assert info.value.residual > 0

    def test_range(self, rng):
        mdp = make_mdp(rng, 5, 2, gamma=0.8)
        q = solve_optimal_q(mdp, TOL)
        assert q.min() >= 0 and q.max() <= 1 / (1 - 0.8) + TOL


class TestEvaluatePolicy:
    def test_hand_computed(self):
        mdp = one_state_two_actions()
        q = evaluate_policy_q(mdp, Policy.uniform(1, 2), TOL)
        np.testing.assert_allclose(q[0], [1.5, 0.5], atol=TOL)
        assert policy_value(mdp, Policy.uniform(1, 2), TOL)[0] == pytest.approx(1.0, abs=TOL)

    def test_greedy_matches_optimal(self, rng):
        mdp = make_mdp(rng, 6, 3, gamma=0.9)
        q_star = solve_optimal_q(mdp, TOL)
        q_pi = evaluate_policy_q(mdp, greedy_policy(q_star), TOL)
        assert np.abs(q_pi - q_star).max() <= 2 * TOL

    def test_matches_linear_solve(self, rng):
        mdp = make_mdp(rng, 4, 3, gamma=0.9)
        pol = Policy(rng.dirichlet(np.ones(3), size=4))
        exact = linear_policy_q(mdp.cmp.transitions, mdp.reward.success_prob, pol.action_prob, 0.9)
        assert np.abs(evaluate_policy_q(mdp, pol, TOL) - exact).max() <= TOL

    def test_dimension_mismatch(self, rng):
        mdp = make_mdp(rng, 4, 3)
        with pytest.raises(ValueError):
            evaluate_policy_q(mdp, Policy.uniform(4, 2))

    def test_deterministic_value(self, rng):
        mdp = make_mdp(rng, 4, 3)
        pol = Policy.deterministic([0, 2, 1, 1], 3)
        q = evaluate_policy_q(mdp, pol, TOL)
        v = policy_value(mdp, pol, TOL)
        np.testing.assert_allclose(v, q[np.arange(4), [0, 2, 1, 1]], atol=1e-12)

    def test_zero_reward(self, rng):
        mdp = make_mdp(rng, 4, 3)
        zero = Mdp(mdp.cmp, RewardModel(np.zeros((4, 3))), 0.9)
        assert np.all(policy_value(zero, Policy(rng.dirichlet(np.ones(3), size=4))) == 0)

    def test_policy_improvement_dominance(self, rng):
        mdp = make_mdp(rng, 5, 3, gamma=0.9)
        q_greedy = evaluate_policy_q(mdp, greedy_policy(solve_optimal_q(mdp, TOL)), TOL)
        for _ in range(100):
            pol = Policy(rng.dirichlet(np.ones(3), size=5))
            assert np.all(q_greedy >= evaluate_policy_q(mdp, pol, TOL) - 4 * TOL)


class TestSoftmax:
    def test_zero_eta_uniform(self, rng):
        np.testing.assert_array_equal(softmax_policy(rng.random((3, 4)), 0.0).action_prob, 0.25)

    def test_ln3(self):
        p = softmax_policy(np.array([[1.0, 0.0]]), math.log(3)).action_prob
        np.testing.assert_allclose(p[0], [0.75, 0.25], atol=1e-12)

    def test_large_eta(self):
        p = softmax_policy(np.array([[0.3, 0.2, 0.1]]), 1e6).action_prob
        assert p[0, 0] >= 1 - 1e-9

    def test_negative_eta(self):
        with pytest.raises(ValueError):
            softmax_policy(np.zeros((1, 2)), -1.0)

    @given(
        arrays(np.float64, (4, 3), elements=st.floats(-50, 50)),
        st.sampled_from([0.0, 1.0, 10.0, 1e6]),
        arrays(np.float64, (4, 1), elements=st.floats(-100, 100)),
    )
    def test_rows_sum_to_one(self, q, eta, shift):
        p = softmax_policy(q + shift, eta).action_prob
        assert np.abs(p.sum(axis=1) - 1).max() <= 1e-12

    @given(
        arrays(np.float64, (4, 3), elements=st.floats(-50, 50)),
        st.sampled_from([0.0, 0.5, 1.0, 10.0]),
        arrays(np.float64, (4, 1), elements=st.floats(-100, 100)),
    )
    def test_shift_invariance(self, q, eta, shift):
        p = softmax_policy(q, eta).action_prob
        assert np.abs(softmax_policy(q + shift, eta).action_prob - p).max() <= 1e-12

    @given(arrays(np.float64, 4, elements=st.floats(-5, 5)))
    def test_argmax_monotone(self, row):
        if np.sum(row == row.max()) > 1:
            return
        k = row.argmax()
        probs = [softmax_policy(row[None, :], eta).action_prob[0, k] for eta in (0, 0.5, 1, 2, 5, 20)]
        assert all(b >= a - 1e-15 for a, b in zip(probs, probs[1:]))


class TestGreedy:
    def test_unique(self):
        np.testing.assert_array_equal(greedy_policy(np.array([[2.0, 1.0, 1.0]])).action_prob, [[1, 0, 0]])

    def test_tie(self):
        np.testing.assert_array_equal(greedy_policy(np.array([[1.0, 1.0]]), 0.0).action_prob, [[0.5, 0.5]])

    def test_tie_band(self):
        tol = 1e-6
        p = greedy_policy(np.array([[1.0, 1.0 - tol / 2]]), tol).action_prob
        np.testing.assert_array_equal(p, [[0.5, 0.5]])


class TestLikelihood:
    def test_deterministic_match(self):
        pol = Policy.deterministic([1, 0], 2)
        assert trajectory_log_likelihood(pol, Trajectory([0, 1, 0], [1, 0, 1])) == 0.0

    def test_uniform(self):
        ll = trajectory_log_likelihood(Policy.uniform(2, 4), Trajectory([0, 1, 1], [3, 2, 0]))
        assert ll == pytest.approx(3 * math.log(0.25), abs=1e-12)
        assert ll == pytest.approx(-4.1589, abs=1e-4)

    def test_zero_probability(self):
        assert trajectory_log_likelihood(Policy.deterministic([0], 2), Trajectory([0], [1])) == -np.inf

    def test_empty(self):
        assert trajectory_log_likelihood(Policy.uniform(2, 2), Trajectory([], [])) == 0.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            trajectory_log_likelihood(Policy.uniform(2, 2), Trajectory([2], [0]))

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(0, 20))
    def test_concat_additive(self, seed, n1, n2):
        rng = np.random.default_rng(seed)
        pol = Policy(rng.dirichlet(np.ones(3), size=4))
        t1 = Trajectory(rng.integers(0, 4, n1), rng.integers(0, 3, n1))
        t2 = Trajectory(rng.integers(0, 4, n2), rng.integers(0, 3, n2))
        whole = trajectory_log_likelihood(pol, t1.concat(t2))
        parts = trajectory_log_likelihood(pol, t1) + trajectory_log_likelihood(pol, t2)
        assert whole == pytest.approx(parts, abs=1e-9)


class TestLoss:
    def test_optimal_is_zero(self, rng):
        mdp = make_mdp(rng, 6, 3)
        assert l1_loss(mdp, greedy_policy(solve_optimal_q(mdp, TOL)), TOL) <= 2 * TOL * 6

    def test_hand_computed(self):
        assert l1_loss(one_state_two_actions(), Policy.uniform(1, 2), TOL) == pytest.approx(1.0, abs=3 * TOL)

    def test_uniform_positive_with_gap(self, rng):
        mdp = make_mdp(rng, 5, 3)
        q = solve_optimal_q(mdp, TOL)
        srt = np.sort(q, axis=1)
        assert (srt[:, -1] - srt[:, -2]).max() > 4 * TOL
        assert l1_loss(mdp, Policy.uniform(5, 3), TOL) > 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_non_negative(self, seed):
        rng = np.random.default_rng(seed)
        mdp = make_mdp(rng, 4, 2, gamma=0.9)
        assert l1_loss(mdp, Policy(rng.dirichlet(np.ones(2), size=4)), TOL) >= 0
