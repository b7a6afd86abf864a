# tests\test_core.py
import math

import numpy as np
import pytest

from numerics.core import (Grid, ScalarField, SpeciesState, SupportSet, default_threshold,
                           l1_difference, mass, masses, norm_field, support, support_distance)
from numerics.errors import GridError, PreconditionError


def test_centered_grid_geometry():
    grid = Grid.centered(1, 2.0, 8)
    assert grid.origin == (-2.0,)
    assert grid.spacing == (0.5,)
    assert grid.upper == (2.0,)
    np.testing.assert_allclose(grid.axis_centers(0), [-1.75, -1.25, -0.75, -0.25, 0.25, 0.75, 1.25, 1.75])
    assert grid.axis_faces(0).size == 7


def test_box_grid_2d():
    grid = Grid.box([-1.0, 0.0], [1.0, 4.0], (4, 8))
    assert grid.shape == (4, 8)
    assert grid.cell_volume == pytest.approx(0.25)
    assert grid.points().shape == (4, 8, 2)
    assert grid.contains([0.0, 4.0])
    assert not grid.contains([0.0, 4.5])


@pytest.mark.parametrize("kwargs", [
    dict(dim=3, cells=(4, 4, 4), origin=(0, 0, 0), spacing=(1, 1, 1)),
    dict(dim=1, cells=(2,), origin=(0,), spacing=(1,)),
    dict(dim=1, cells=(8,), origin=(0,), spacing=(0,)),
])
def test_invalid_grids(kwargs):
    with pytest.raises(GridError):
        Grid(**kwargs)


def test_box_rejects_inverted_corners():
    with pytest.raises(GridError):
        Grid.box([1.0], [0.0], 8)


def test_refined_and_scaled_keep_extent():
    grid = Grid.centered(2, 1.0, 8)
    fine = grid.refined(2)
    assert fine.cells == (16, 16)
    assert fine.upper == pytest.approx(grid.upper)
    scaled = grid.scaled(0.5)
    assert scaled.upper == pytest.approx((0.5, 0.5))
    with pytest.raises(GridError):
        grid.scaled(0.0)


def test_state_clamps_rounding_negatives(grid_1d):
    fields = np.ones((2,) + grid_1d.shape)
    fields[0, 3] = -1e-17
    state = SpeciesState(grid_1d, fields, 0.5)
    assert state.fields.min() == 0.0
    assert state.k == 2
    assert not state.fields.flags.writeable


def test_state_rejects_bad_input(grid_1d):
    with pytest.raises(GridError):
        SpeciesState(grid_1d, np.ones(7))
    with pytest.raises(GridError):
        SpeciesState(grid_1d, np.full(grid_1d.shape, np.nan))
    with pytest.raises(GridError):
        SpeciesState(grid_1d, np.ones(grid_1d.shape), -1.0)


def test_single_species_array_gets_species_axis(grid_1d):
    state = SpeciesState(grid_1d, np.ones(grid_1d.shape))
    assert state.fields.shape == (1,) + grid_1d.shape


def test_mass_of_constant_field(grid_1d):
    state = SpeciesState(grid_1d, np.stack([np.ones(grid_1d.shape), 2.0 * np.ones(grid_1d.shape)]))
    assert mass(state, 0) == pytest.approx(4.0, rel=1e-15)
    assert masses(state) == pytest.approx((4.0, 8.0), rel=1e-15)
    with pytest.raises(PreconditionError):
        mass(state, 2)


def test_norm_field_is_euclidean(grid_1d):
    state = SpeciesState(grid_1d, np.stack([3.0 * np.ones(grid_1d.shape), 4.0 * np.ones(grid_1d.shape)]))
    norm = norm_field(state)
    assert isinstance(norm, ScalarField)
    np.testing.assert_allclose(norm.values, 5.0)


def test_default_threshold_floor_and_relative():
    assert default_threshold(np.zeros(4)) == pytest.approx(1e-10)
    assert default_threshold(np.array([0.0, 1e4])) == pytest.approx(1e-4)


def test_support_and_set_algebra(grid_1d):
    x = grid_1d.axis_centers(0)
    left = support(ScalarField(grid_1d, np.where(x < 0.0, 1.0, 0.0)))
    right = support(ScalarField(grid_1d, np.where(x > -0.5, 1.0, 0.0)))
    assert left.count == 64
    assert (left & right).count == 16
    assert (left | right).count == 128
    assert (left ^ right).count == 112
    assert (left & right) <= left
    box = left.bounding_box()
    assert box[0][0] == pytest.approx(x[0])
    assert box[0][1] == pytest.approx(x[63])
    assert SupportSet(grid_1d, np.zeros(grid_1d.shape)).bounding_box() is None


def test_support_negative_threshold(grid_1d):
    with pytest.raises(PreconditionError):
        support(ScalarField(grid_1d, np.ones(grid_1d.shape)), -1.0)


def test_support_distance(grid_1d):
    x = grid_1d.axis_centers(0)
    h = grid_1d.spacing[0]
    a = SupportSet(grid_1d, x < -1.0)
    b = SupportSet(grid_1d, x > 1.0)
    # nearest centers are -1 - h/2 and 1 + h/2
    assert support_distance(a, b) == pytest.approx(2.0 + h)
    assert support_distance(a, a) == 0.0
    assert math.isinf(support_distance(a, SupportSet(grid_1d, np.zeros(grid_1d.shape, bool))))


def test_l1_difference_requires_same_grid(grid_1d):
    a = SpeciesState(grid_1d, np.ones(grid_1d.shape))
    b = SpeciesState(grid_1d, np.zeros(grid_1d.shape))
    assert l1_difference(a, b) == pytest.approx((4.0,))
    other = SpeciesState(grid_1d.refined(2), np.zeros(grid_1d.refined(2).shape))
    with pytest.raises(GridError):
        l1_difference(a, other)
