import functools

import numpy as np
import pytest

from hle_radial.operators import LineGrid, TrajectoryPair
from hle_radial.params import SystemParams, derive_reduced
from hle_radial.variational import SolverOptions, minimize_quotient

SOLITON = (4, 0, 0, 4, 4)
ASYMMETRIC = (3, 0, 0, 4, 12)
P2_CASE = (4, -1, -2, 2, 4)
MIXED_A = (3, -4, 3, 2, 4)
MIXED_B = (2, -1, -4, 2, 4)
SUBQUADRATIC = (4, -2, 0, 1.5, 6)


@functools.lru_cache(maxsize=None)
def solve_cached(tup, L=30.0, h=0.01, multistarts=1):
    red = derive_reduced(SystemParams(*tup))
    return minimize_quotient(red, LineGrid(L, h), SolverOptions(multistarts=multistarts))


def soliton_profile(s):
    return np.sqrt(2.0) / np.cosh(s)


@pytest.fixture(scope="session")
def soliton_red():
    return derive_reduced(SystemParams(*SOLITON))


@pytest.fixture(scope="session")
def soliton_result():
    return solve_cached(SOLITON, 15.0, 0.01)


def exact_soliton_pair(L, h):
    grid = LineGrid(L, h)
    g = soliton_profile(grid.s)
    return TrajectoryPair(grid, g, g.copy(), derive_reduced(SystemParams(*SOLITON)))
