"""Shared fixtures. Expensive profiles are computed once per session."""

import pytest

from benlab.spectral import make_grid
from benlab.waves import WaveParams, continue_branch, petviashvili_solve


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(512, 100.0)


@pytest.fixture(scope="session")
def grid_mid():
    return make_grid(1024, 200.0)


@pytest.fixture(scope="session")
def grid_wide():
    return make_grid(2048, 400.0)


@pytest.fixture(scope="session")
def kdv_wave(grid_mid):
    return petviashvili_solve(WaveParams(0.0, 1.0), grid_mid)


@pytest.fixture(scope="session")
def wave_g01(grid_wide):
    return continue_branch(0.1, 1.0, grid_wide)
