# tests\test_selfsim.py
import math

import numpy as np
import pytest

from conftest import bump
from numerics.barenblatt import BarenblattProfile
from numerics.core import Grid, SpeciesState
from numerics.errors import DomainError, GridError, PreconditionError
from numerics.selfsim import (RescaledState, dissipation_mismatch, entropy, entropy_increase,
                              entropy_run, entropy_trace, equilibrium_distance,
                              equilibrium_entropy_drift, equilibrium_state, evolve, stable_dtau,
                              to_physical, to_selfsimilar)


@pytest.fixture
def rescaled():
    grid = Grid.centered(1, 3.0, 128)
    fields = np.stack([bump(grid, [-0.25], 0.5), bump(grid, [0.25], 0.5)])
    return to_selfsimilar(SpeciesState(grid, fields, 1.0), 2.0)


def test_selfsimilar_round_trip():
    grid = Grid.centered(1, 2.0, 64)
    state = SpeciesState(grid, bump(grid, [0.0], 0.8), 2.0)
    rs = to_selfsimilar(state, 2.0)
    assert rs.tau == pytest.approx(math.log(2.0))
    back = to_physical(rs, 2.0)
    assert back.time == pytest.approx(2.0)
    np.testing.assert_allclose(back.fields, state.fields, rtol=1e-14)
    np.testing.assert_allclose(back.grid.spacing, grid.spacing, rtol=1e-14)


def test_selfsimilar_needs_positive_time():
    grid = Grid.centered(1, 2.0, 64)
    with pytest.raises(DomainError):
        to_selfsimilar(SpeciesState(grid, bump(grid, [0.0], 0.8), 0.0), 2.0)


def test_rescaled_state_validation():
    grid = Grid.centered(1, 1.0, 8)
    with pytest.raises(GridError):
        RescaledState(grid, np.ones(9))
    with pytest.raises(GridError):
        RescaledState(grid, np.full(8, np.inf))


def test_barenblatt_is_stationary_in_selfsimilar_variables():
    # B_M(x, t) rescaled at any t is the same profile
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    grid = Grid.centered(1, 5.0, 200)
    for t in (1.0, 3.0):
        state = SpeciesState(grid, profile.sample(grid, t), t)
        rs = to_selfsimilar(state, 2.0)
        np.testing.assert_allclose(rs.theta[0], profile.sample_rescaled(rs.grid), atol=1e-14)


def test_equilibrium_state_masses():
    grid = Grid.centered(1, 4.0, 2048)
    eq = equilibrium_state(grid, (0.6, 0.8), 2.0)
    assert eq.masses() == pytest.approx((0.6, 0.8), rel=1e-4)
    assert max(equilibrium_distance(eq, (0.6, 0.8), 2.0)) == pytest.approx(0.0, abs=1e-14)


def test_entropy_of_equilibrium_matches_closed_form():
    grid = Grid.centered(1, 4.0, 4096)
    profile = BarenblattProfile.calibrated(1.0, 2.0, 1)
    record = entropy(equilibrium_state(grid, (1.0,), 2.0), 2.0)
    assert record.H == pytest.approx(profile.entropy(), rel=1e-4)
    assert record.I2 == pytest.approx(0.0, abs=1e-12)


def test_equilibrium_entropy_drifts_only_by_discretization():
    grid = Grid.centered(1, 4.0, 256)
    eq = equilibrium_state(grid, (0.6, 0.8), 2.0)
    later = evolve(eq, 2.0, 0.2)
    assert later.tau == 0.2
    h0, h1 = entropy(eq, 2.0).H, entropy(later, 2.0).H
    assert abs(h1 - h0) <= 2e-2 * abs(h0)


def test_equilibrium_entropy_drift_is_second_order():
    coarse = equilibrium_entropy_drift(Grid.centered(1, 4.0, 256), (0.6, 0.8), 2.0, 1.0)
    fine = equilibrium_entropy_drift(Grid.centered(1, 4.0, 512), (0.6, 0.8), 2.0, 1.0)
    assert 0.0 < fine < coarse < 1e-3
    assert coarse / fine > 3.0


def test_stable_dtau_is_positive(rescaled):
    assert 0.0 < stable_dtau(rescaled, 2.0) < 1e-2


def test_evolve_conserves_mass(rescaled):
    later = evolve(rescaled, 2.0, rescaled.tau + 0.05)
    assert later.masses() == pytest.approx(rescaled.masses(), rel=1e-12)
    assert later.theta.min() >= 0.0


def test_evolve_rejects_past_target(rescaled):
    with pytest.raises(PreconditionError):
        evolve(rescaled, 2.0, rescaled.tau - 1.0)


def test_entropy_decays_and_dissipation_is_nonnegative(rescaled):
    trace = entropy_trace(rescaled, 2.0, rescaled.tau + 0.3, stride=50)
    assert len(trace) > 3
    assert math.isnan(trace[0].dH_dtau_numeric)
    assert entropy_increase(trace) <= 1e-8
    assert min(r.I1 for r in trace) >= 0.0
    assert min(r.I2 for r in trace) >= -1e-12 * max(1.0, max(r.I1 for r in trace))
    assert trace[-1].H < trace[0].H


def test_entropy_run_reaches_end_and_moves_to_equilibrium(rescaled):
    trace, final = entropy_run(rescaled, 2.0, rescaled.tau + 0.5, stride=100)
    assert final.tau == rescaled.tau + 0.5
    assert trace[-1].tau == final.tau
    M = rescaled.masses()
    start = math.fsum(equilibrium_distance(rescaled, M, 2.0))
    end = math.fsum(equilibrium_distance(final, M, 2.0))
    assert end < start


def test_dissipation_balance_improves_under_refinement():
    def mismatch(cells):
        grid = Grid.centered(1, 3.0, cells)
        fields = np.stack([bump(grid, [-0.25], 0.5), bump(grid, [0.25], 0.5)])
        rs = to_selfsimilar(SpeciesState(grid, fields, 1.0), 2.0)
        return dissipation_mismatch(entropy_trace(rs, 2.0, rs.tau + 0.05, 1), warmup=0.01)

    coarse, fine = mismatch(128), mismatch(256)
    assert fine < coarse
    assert fine < 0.5 * coarse


@pytest.mark.parametrize("stride", [0, -3])
def test_entropy_run_stride_validation(rescaled, stride):
    with pytest.raises(PreconditionError):
        entropy_run(rescaled, 2.0, rescaled.tau + 0.1, stride)
