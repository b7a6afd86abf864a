# tests\conftest.py
import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from numerics.core import Grid, SpeciesState  # noqa: E402

SCENARIO_DIR = os.path.join(ROOT, 'scenarios')


def pytest_configure(config):
    config.addinivalue_line('markers', "slow: long acceptance runs of the shipped scenarios")


def bump(grid, center, radius, amplitude=1.0, m=2.0):
    """amplitude * (1 - |x - center|^2 / radius^2)_+^{1/(m-1)} at the cell centers."""
    offset = grid.points() - np.atleast_1d(np.asarray(center, dtype=float))
    r2 = np.sum(offset * offset, axis=-1)
    return amplitude * np.maximum(1.0 - r2 / radius ** 2, 0.0) ** (1.0 / (m - 1.0))


@pytest.fixture
def grid_1d():
    return Grid.centered(1, 2.0, 128)


@pytest.fixture
def two_bumps(grid_1d):
    """Two overlapping species on grid_1d."""
    fields = np.stack([bump(grid_1d, [-0.3], 0.6), bump(grid_1d, [0.3], 0.6, 0.5)])
    return SpeciesState(grid_1d, fields, 0.0)


@pytest.fixture
def disjoint_bumps(grid_1d):
    fields = np.stack([bump(grid_1d, [-1.2], 0.3, 0.5), bump(grid_1d, [1.2], 0.3, 0.5)])
    return SpeciesState(grid_1d, fields, 0.0)
