import logging

import numpy as np
import pytest

from ibnls.discretization import RadialGrid
from ibnls.groundstate import GroundStateProblem, solve_p2
from ibnls.params import ModelParams


@pytest.fixture(autouse=True, scope="session")
def _quiet_logging():
    logging.disable(logging.WARNING)
    yield
    logging.disable(logging.NOTSET)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def q_small():
    """p = 2 ground state at (3, 1, 1/2) on a modest radial grid."""
    P = ModelParams(3, 1, "1/2")
    grid = RadialGrid.from_extent(3, 512, 30.0)
    prob = GroundStateProblem(P, grid, "p_equals_2")
    return prob, solve_p2(prob)


@pytest.fixture(scope="session")
def q_321():
    """p = 2 ground state at (3, 2, 1) on the grid used for evolution runs."""
    P = ModelParams(3, 2, 1)
    grid = RadialGrid.from_extent(3, 256, 20.0)
    prob = GroundStateProblem(P, grid, "p_equals_2")
    return prob, solve_p2(prob)
