import numpy as np
import pytest

from shopfloor.sim import ProductionEnv, load_scenario
from shopfloor.sim.encoding import StateLayout


@pytest.fixture(scope="session")
def mini_scenario():
    return load_scenario("mini")


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario("default")


@pytest.fixture(scope="session")
def mini_env_factory(mini_scenario):
    """Shares the (expensive) grid/graph build across tests via one template env."""
    template = ProductionEnv(mini_scenario)

    def factory():
        return ProductionEnv(mini_scenario, grid=template.grid, graph=template.graph)

    return factory


@pytest.fixture(scope="session")
def default_env_factory(default_scenario):
    template = ProductionEnv(default_scenario)

    def factory():
        return ProductionEnv(default_scenario, grid=template.grid, graph=template.graph)

    return factory


@pytest.fixture(scope="session")
def mini_layout(mini_scenario):
    return StateLayout.for_scenario(mini_scenario)


@pytest.fixture(scope="session")
def default_layout(default_scenario):
    return StateLayout.for_scenario(default_scenario)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
