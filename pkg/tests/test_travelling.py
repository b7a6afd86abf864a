# tests\test_travelling.py
import math

import numpy as np
import pytest

from numerics.core import Grid
from numerics.errors import ConfigurationError, MixedOrientationError, ParameterError
from numerics.travelling import (Orientation, TravellingWave, dirichlet_tw_run, epsilon_scale,
                                 ode_residual, speed_from_coeffs)


def test_speed_law():
    assert speed_from_coeffs((1.0, 1.0), 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-14)
    assert speed_from_coeffs((2.0, 2.0, 1.0), 3.0) == pytest.approx(4.5, abs=1e-14)
    assert speed_from_coeffs((3.0, 4.0), 2.0) == pytest.approx(5.0)
    assert speed_from_coeffs((3.0, 4.0), 3.0) == pytest.approx(12.5)
    assert speed_from_coeffs((3.0, 4.0), 2.0, mobility=2.0) == pytest.approx(10.0)


@pytest.mark.parametrize("coeffs, m", [((0.0, 1.0), 2.0), ((1.0,), 1.0), ((), 2.0)])
def test_speed_law_rejects_bad_input(coeffs, m):
    with pytest.raises(ParameterError):
        speed_from_coeffs(coeffs, m)


def test_direction_is_normalized():
    wave = TravellingWave.along(2.0, (1.0,), (3.0, 4.0))
    assert wave.direction == pytest.approx((0.6, 0.8))
    with pytest.raises(ParameterError):
        TravellingWave(2.0, (1.0,), (1.0, 1.0))


def test_mixed_orientations_are_rejected():
    with pytest.raises(MixedOrientationError):
        TravellingWave.from_species_orientations(2.0, (1.0, 0.5), ('left', 'right'))


def test_wave_evaluation_and_front():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    assert wave.mobility == 2.0
    t = 0.2
    front = wave.front(t)
    assert front == pytest.approx(wave.speed * t)
    assert wave.evaluate(0, front + 0.01, t) == 0.0
    assert wave.evaluate(0, front - 0.1, t) == pytest.approx(0.1)
    assert wave.evaluate(1, front - 0.1, t) == pytest.approx(0.05)


def test_right_orientation_mirrors_the_wave():
    left = TravellingWave.for_solver(2.0, (1.0,), orientation=Orientation.LEFT)
    right = TravellingWave.for_solver(2.0, (1.0,), orientation=Orientation.RIGHT)
    assert right.front(0.3) == pytest.approx(-left.front(0.3))
    assert right.evaluate(0, -0.2, 0.3) == pytest.approx(left.evaluate(0, 0.2, 0.3))


@pytest.mark.parametrize("m", [1.5, 2.0])
def test_profile_solves_the_wave_ode(m):
    wave = TravellingWave.for_solver(m, (1.0, 0.5))
    residual, h_s = ode_residual(wave, np.linspace(-1.0, 1.0, 401))
    assert h_s == 1e-3
    assert residual <= 1e-8


def test_profile_residual_is_exact_for_m2():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    residual, _ = ode_residual(wave, np.linspace(-1.0, 1.0, 401))
    assert residual <= 1e-12


def test_wrong_speed_leaves_a_residual():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    residual, _ = ode_residual(wave, np.linspace(-1.0, 1.0, 401), speed=1.1 * wave.speed)
    assert residual > 1e-3


def test_epsilon_scaling_leaves_the_wave_invariant():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    grid = Grid.box([-0.25], [1.0], 40)
    state = wave.sample(grid, 0.1)
    scaled = epsilon_scale(state, 0.5, 2.0)
    expected = wave.sample(grid.scaled(0.5), 0.05)
    assert scaled.time == pytest.approx(0.05)
    np.testing.assert_allclose(scaled.fields, expected.fields, atol=1e-14)
    with pytest.raises(ParameterError):
        epsilon_scale(state, 0.0, 2.0)


def test_dirichlet_run_converges():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    table = dirichlet_tw_run(wave, Grid.box([-0.25], [1.0], 32), 0.05, 0.25, levels=3)
    assert len(table.rows) == 3
    assert table.is_monotone()
    assert table.min_order() >= 0.8
    assert math.isnan(table.rows[0].order_estimate)


def test_dirichlet_run_rejects_front_outside_domain():
    wave = TravellingWave.for_solver(2.0, (1.0, 0.5))
    with pytest.raises(ConfigurationError):
        dirichlet_tw_run(wave, Grid.box([-0.25], [0.3], 32), 0.05, 0.25)


def test_dirichlet_run_needs_solver_mobility():
    wave = TravellingWave(2.0, (1.0,), mobility=1.0)
    with pytest.raises(ConfigurationError):
        dirichlet_tw_run(wave, Grid.box([-0.25], [1.0], 32), 0.05, 0.25)
