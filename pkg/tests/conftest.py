import numpy as np
import pytest

from vecrm.config import ScenarioConfig, preset
from vecrm.game import TaskAssignmentGame
from vecrm.scenario import build_scenario


@pytest.fixture(scope="session")
def small_scenario():
    return build_scenario(preset("scenario1"), 0)


@pytest.fixture(scope="session")
def small_game(small_scenario):
    return TaskAssignmentGame(small_scenario)


@pytest.fixture(scope="session")
def large_scenario():
    return build_scenario(preset("scenario2"), 0)


def tiny_scenario(n_rsus=2, n_vehicles=4, seed=0, **overrides):
    cfg = ScenarioConfig(n_rsus=n_rsus, n_vehicles=n_vehicles)
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return build_scenario(cfg, seed)


def random_payoffs(rng, n, m):
    return rng.uniform(-1.0, 1.0, size=(n,) + (m,) * n)


def all_profiles(n, m):
    import itertools
    return [np.array(p) for p in itertools.product(range(m), repeat=n)]
