# tests\test_barenblatt.py
import math

import numpy as np
import pytest
from scipy import integrate

from numerics.barenblatt import (BarenblattProfile, closed_form_mass, coefficients, mass_constant,
                                 profile_mass, species_profile, species_state, total_mass)
from numerics.core import Grid, masses
from numerics.errors import DomainError, ParameterError, PreconditionError
from numerics.travelling import epsilon_scale


def test_coefficients_m2_n1():
    a1, a2, a3 = coefficients(2.0, 1)
    assert a1 == pytest.approx(1.0 / 3.0)
    assert a2 == pytest.approx(1.0 / 3.0)
    assert a3 == pytest.approx(1.0 / 12.0)


@pytest.mark.parametrize("m, n, expected", [
    (2.0, 2, (1.0 / 2.0, 1.0 / 4.0, 1.0 / 16.0)),
    (3.0, 1, (1.0 / 4.0, 1.0 / 4.0, 1.0 / 12.0)),
])
def test_coefficients_other_models(m, n, expected):
    assert coefficients(m, n) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("m, n", [(0.5, 1), (1.0, 1), (2.0, 3)])
def test_coefficients_reject_bad_model(m, n):
    with pytest.raises(ParameterError):
        coefficients(m, n)


def test_mass_constant_closed_form_m2_n1():
    # M = (8 / sqrt(3)) C^{3/2} for m = 2, n = 1
    C = mass_constant(1.0, 2.0, 1)
    assert C == pytest.approx((math.sqrt(3.0) / 8.0) ** (2.0 / 3.0), rel=1e-10)
    assert C == pytest.approx(0.36056, abs=1e-5)


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [1, 2])
def test_quadrature_mass_matches_gamma_oracle(m, n):
    C = 0.7
    assert profile_mass(C, m, n) == pytest.approx(closed_form_mass(C, m, n), rel=1e-6)


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
def test_quadrature_mass_matches_scipy_quad(m):
    _, _, a3 = coefficients(m, 1)
    C = 0.5
    radius = math.sqrt(C / a3)
    exact, _ = integrate.quad(lambda x: max(C - a3 * x * x, 0.0) ** (1.0 / (m - 1.0)), -radius, radius)
    assert profile_mass(C, m, 1) == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("M", [0.1, 1.0, 7.5])
@pytest.mark.parametrize("m, n", [(2.0, 1), (2.0, 2), (1.5, 2), (3.0, 1)])
def test_calibration_reproduces_mass(M, m, n):
    C = mass_constant(M, m, n)
    assert profile_mass(C, m, n) == pytest.approx(M, rel=1e-12)


@pytest.mark.parametrize("M", [0.0, -1.0, math.inf])
def test_mass_constant_rejects_bad_mass(M):
    with pytest.raises(ParameterError):
        mass_constant(M, 2.0, 1)


def test_profile_support_and_peak():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    R = profile.support_radius(1.0)
    assert profile.evaluate(0.0, 1.0) == pytest.approx(profile.C_M)
    assert profile.evaluate(R * 1.0001, 1.0) == 0.0
    assert profile.evaluate(0.99 * R, 1.0) > 0.0
    # support grows like t^{a2}
    assert profile.support_radius(8.0) == pytest.approx(2.0 * R)


def test_profile_rejects_nonpositive_time():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    with pytest.raises(DomainError):
        profile.evaluate(0.0, 0.0)
    with pytest.raises(DomainError):
        profile.support_radius(-1.0)


def test_profile_evaluates_point_arrays_in_2d():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 2)
    values = profile.evaluate(np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]]), 1.0)
    assert values.shape == (3,)
    assert values[1] == pytest.approx(values[2])


def test_sampled_profile_mass_is_conserved_in_time():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    grid = Grid.centered(1, 6.0, 4096)
    for t in (0.5, 1.0, 4.0):
        sampled = math.fsum(profile.sample(grid, t)) * grid.cell_volume
        assert sampled == pytest.approx(1.0, rel=1e-4)


def test_equilibrium_entropy_m2_n1():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    assert profile.entropy() == pytest.approx(0.43266, abs=1e-3)


def test_to_record_keys():
    record = BarenblattProfile.calibrated(2.0, 2.0, 1).to_record()
    assert set(record) == {'M', 'm', 'n', 'C_M', 'a1', 'a2', 'a3'}
    assert record['M'] == 2.0


def test_species_profiles_have_profile_norm():
    M = (0.6, 0.8)
    profile = BarenblattProfile.calibrated(total_mass(M), 2.0, 1)
    x = np.linspace(-2.0, 2.0, 41)
    parts = np.array([species_profile(profile, M, i, x, 1.0) for i in range(2)])
    np.testing.assert_allclose(np.sqrt(np.sum(parts ** 2, axis=0)), profile.evaluate(x, 1.0), rtol=1e-14)


def test_species_profile_preconditions():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    with pytest.raises(PreconditionError):
        species_profile(profile, (1.0, 1.0), 0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        species_profile(profile, (1.0, 0.0), 0, 0.0, 1.0)


def test_species_state_masses():
    grid = Grid.centered(1, 4.0, 2048)
    state = species_state(grid, (0.3, 0.4), 2.0, 1.0)
    assert masses(state) == pytest.approx((0.3, 0.4), rel=1e-4)


@pytest.mark.parametrize("m", [2.0, 3.0])
def test_profile_solves_the_porous_medium_equation(m):
    # central differences of B_t and (B^m)_xx inside the support
    profile = BarenblattProfile.calibrated(1.0, m, 1)
    t, k, h = 1.0, 1e-4, 1e-3
    x = np.linspace(-0.7, 0.7, 29) * profile.support_radius(t)
    b_t = (profile.evaluate(x, t + k) - profile.evaluate(x, t - k)) / (2.0 * k)
    power = [np.asarray(profile.evaluate(x + s, t)) ** m for s in (-h, 0.0, h)]
    b_xx = (power[0] - 2.0 * power[1] + power[2]) / h ** 2
    assert np.max(np.abs(b_t)) > 1e-2
    np.testing.assert_allclose(b_t, b_xx, atol=1e-6)


def test_wave_scaling_does_not_preserve_barenblatt():
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    grid = Grid.centered(1, 6.0, 1200)
    state = species_state(grid, (1.0,), 2.0, 1.0)
    scaled = epsilon_scale(state, 0.25, 2.0)
    reference = profile.sample(scaled.grid, scaled.time)
    change = math.fsum(np.abs(scaled.fields[0] - reference)) / math.fsum(np.abs(reference))
    assert change > 0.1
