import math

import pytest

from ttlab.config import bundled_config
from ttlab.model import CommGraph, FormationSpec, Limits, UnicycleState

# The bundled 4-agent scenario, shared by most suites.
EDGES = ((0, 1), (0, 3), (1, 2), (1, 3), (2, 3))
DISTANCES = {
    (0, 1): 2.0,
    (0, 3): 1.0,
    (1, 2): 1.0,
    (1, 3): math.sqrt(5.0),
    (2, 3): 2.0,
}
GAIN = 150.0
INITIAL = (
    UnicycleState(6.0, 10.0, math.pi / 2),
    UnicycleState(7.0, 3.0, math.pi / 2),
    UnicycleState(14.0, 8.0, math.pi / 2),
    UnicycleState(7.0, 13.0, math.pi / 2),
)


@pytest.fixture(scope="session")
def limits():
    return Limits(max_speed=5.0, max_turn=3.0)


@pytest.fixture(scope="session")
def graph():
    return CommGraph(4, EDGES)


@pytest.fixture(scope="session")
def spec():
    return FormationSpec(DISTANCES, GAIN)


@pytest.fixture(scope="session")
def scenario():
    return bundled_config("formation4")


@pytest.fixture(scope="session")
def robust_scenario():
    return bundled_config("formation4_robust")
