import numpy as np
import pytest

from replicator_lab import dynamics, games


@pytest.fixture(scope="session")
def pd_game():
    # D strictly dominates C for both players; (D, D) is the lone strict equilibrium
    return games.GameDef(2, (2, 2), [[[3, 0], [5, 1]], [[3, 5], [0, 1]]])


@pytest.fixture(scope="session")
def two_round_game():
    # built so that player 0's strategy 2 survives round 1 and falls only in
    # round 2, once player 1's columns 1 and 2 are gone
    return games.GameDef(
        2, (3, 3),
        [[[5, 4, 1], [6, 5, 6], [4, 6, 2]],
         [[3, 2, 1], [4, 3, 2], [5, 4, 1]]],
    )


@pytest.fixture(scope="session")
def minority3():
    return games.minority_game(3, 1.0, 0.0)


@pytest.fixture(scope="session")
def lone_diner():
    # facility 0 pays 1 regardless of crowding, facility 1 pays 2 only when
    # alone; the strict equilibria put exactly one player on facility 1
    return games.congestion_game(3, [[1.0, 1.0, 1.0], [2.0, 0.0, 0.0]])


@pytest.fixture(scope="session")
def neg_load_game():
    # two facilities, both with payoff -k at load k
    return games.congestion_game(2, [[-1.0, -2.0], [-1.0, -2.0]])


@pytest.fixture(scope="session")
def matching_pennies():
    return games.GameDef(2, (2, 2), [[[1, -1], [-1, 1]], [[-1, 1], [1, -1]]])


@pytest.fixture
def uniform22():
    return games.MixedProfile.uniform((2, 2))


def srd_unit(game, eta=1.0):
    return dynamics.DynamicsSpec.plain(
        "SRD", game, noise=dynamics.NoiseModel.uniform(game.strategy_counts, eta)
    )


@pytest.fixture(scope="session")
def pd_srd(pd_game):
    return srd_unit(pd_game)


def random_interior(rng, strategy_counts, alpha=1.0):
    rows = tuple(rng.dirichlet(np.full(s, alpha)) for s in strategy_counts)
    return games.MixedProfile(rows)
