import numpy as np
import pytest

from irl_elicit import ControlledMarkovProcess, Mdp, RewardModel

from oracles import random_cmp


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_mdp(rng, n_states, n_actions, gamma=0.9, density=1.0):
    t = random_cmp(rng, n_states, n_actions, density)
    cmp = ControlledMarkovProcess(t, np.full(n_states, 1.0 / n_states))
    return Mdp(cmp, RewardModel(rng.random((n_states, n_actions))), gamma)


def one_state_two_actions(gamma=0.5):
    cmp = ControlledMarkovProcess(np.ones((1, 2, 1)), np.ones(1))
    return Mdp(cmp, RewardModel(np.array([[1.0, 0.0]])), gamma)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line[1])
