import numpy as np
import pytest

from semiheat import InitialDataSpec, ProblemParams, RunConfig, build_grid
from semiheat.acceptance import Suite


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3, 1024, 16.0)


@pytest.fixture(scope="session")
def grid3_fine():
    return build_grid(3, 2048, 16.0)


@pytest.fixture(scope="session")
def params():
    return ProblemParams(3, 5.0, 0.5, InitialDataSpec("gaussian", 0.1, 2.0))


@pytest.fixture(scope="session")
def suite():
    """Shares the default desk run across the test session."""
    return Suite(RunConfig())


@pytest.fixture(scope="session")
def default_run(suite):
    return suite.run


def phi1(grid):
    f = np.exp(-grid.nodes**2 / 4)
    f[-1] = 0.0
    return f
