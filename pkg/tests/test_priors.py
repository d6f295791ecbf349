import numpy as np
import pytest
from scipy import integrate, stats

from irl_elicit import BetaProductPrior, GammaPrior, GridRewardPrior, RewardModel


class TestBetaProduct:
    def test_validation(self):
        with pytest.raises(ValueError):
            BetaProductPrior(np.ones((2, 2)), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            BetaProductPrior(np.ones((2, 2)), np.ones((2, 3)))

    def test_log_density_matches_scipy(self, rng):
        prior = BetaProductPrior(rng.uniform(0.5, 3, (3, 2)), rng.uniform(0.5, 3, (3, 2)))
        p = rng.random((3, 2))
        expected = stats.beta.logpdf(p, prior.alpha, prior.beta).sum()
        assert prior.log_density(RewardModel(p)) == pytest.approx(expected, rel=1e-12)

    def test_updated(self):
        prior = BetaProductPrior.constant(2, 2, 1.0, 2.0)
        post = prior.updated(np.array([[1, 0], [0, 3]]), np.array([[0, 2], [0, 0]]))
        np.testing.assert_array_equal(post.alpha, [[2, 1], [1, 4]])
        np.testing.assert_array_equal(post.beta, [[2, 4], [2, 2]])

    def test_mean(self):
        assert BetaProductPrior.constant(1, 1, 2.0, 6.0).mean()[0, 0] == 0.25


class TestGrid:
    def test_from_beta_uniform(self):
        g = GridRewardPrior.from_beta(2, 2, 9)
        np.testing.assert_allclose(g.points, (np.arange(9) + 0.5) / 9)
        np.testing.assert_allclose(g.probabilities(), 1 / 9)

    def test_update_is_bayes(self, rng):
        g = GridRewardPrior.from_beta(1, 1, 5, 2.0, 3.0)
        post = g.updated(np.array([[3]]), np.array([[1]]))
        w = g.probabilities()[0, 0] * g.points**3 * (1 - g.points)
        np.testing.assert_allclose(post.probabilities()[0, 0], w / w.sum(), rtol=1e-12)

    def test_sampling_frequencies(self, rng):
        g = GridRewardPrior.from_beta(1, 1, 4, 2.0, 5.0)
        idx = np.array([g.sample_indices(rng)[0, 0] for _ in range(40_000)])
        freq = np.bincount(idx, minlength=4) / idx.size
        np.testing.assert_allclose(freq, g.probabilities()[0, 0], atol=0.01)

    def test_index_and_density(self):
        g = GridRewardPrior.from_beta(1, 2, 3)
        r = RewardModel(g.points[[[0, 2]]])
        np.testing.assert_array_equal(g.index_of(r), [[0, 2]])
        assert g.log_density(r) == pytest.approx(2 * np.log(1 / 3))
        with pytest.raises(ValueError):
            g.index_of(RewardModel(np.array([[0.123, 0.5]])))


class TestGamma:
    def test_moments(self, rng):
        prior = GammaPrior(2.0, 0.5)
        draws = np.array([prior.sample(rng) for _ in range(50_000)])
        assert draws.mean() == pytest.approx(4.0, rel=0.02)
        assert draws.var() == pytest.approx(8.0, rel=0.05)

    def test_log_density(self):
        prior = GammaPrior(3.0, 2.0)
        assert prior.log_density(1.3) == pytest.approx(stats.gamma.logpdf(1.3, 3.0, scale=0.5))
        assert prior.log_density(0.0) == -np.inf

    def test_quadrature(self):
        prior = GammaPrior(2.0, 0.5)
        x, w = prior.quadrature(20)
        assert w.sum() == pytest.approx(1.0)
        # exact for polynomials: E[eta^3] = k (k+1) (k+2) / rate^3
        assert (w * x**3).sum() == pytest.approx(192.0, rel=1e-10)
        exact, _ = integrate.quad(lambda e: np.exp(-0.3 * e) * np.exp(prior.log_density(e)), 0, np.inf)
        assert (w * np.exp(-0.3 * x)).sum() == pytest.approx(exact, rel=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            GammaPrior(0.0, 1.0)
